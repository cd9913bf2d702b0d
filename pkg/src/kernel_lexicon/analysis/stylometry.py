"""Author style from deviations against a pooled kernel-lexicon profile.

Each work is summarized by the vector of its kernel-word frequencies minus
the pooled ("standard") frequencies. Works are compared pairwise and ANOSIM
tests whether works by different authors differ more than works by the
same author.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from enum import StrEnum
from itertools import combinations
from typing import TYPE_CHECKING

import numpy as np
from scipy import stats
from scipy.spatial import distance

from kernel_lexicon.errors import (
    DegenerateVectorError,
    GroupingError,
    ParameterError,
)
from kernel_lexicon.frequency.table import (
    DEFAULT_KERNEL_SIZE,
    FrequencyTable,
    count,
    merge_all,
    parallel_map,
    table_kernel,
)
from kernel_lexicon.utils.logging import get_logger

if TYPE_CHECKING:
    from collections.abc import Callable, Iterable, Iterator, Sequence

logger = get_logger(__name__)

DEFAULT_PERMUTATIONS = 999
MIN_PERMUTATIONS = 99
DEFAULT_MIN_WORK_TOKENS = 2000
MIN_WORKS_PER_AUTHOR = 3
# Permuted R values this close to the observed one count as "at least as large"
_R_TOLERANCE = 1e-12


class FrequencyMode(StrEnum):
    """How per-work and pooled frequencies are expressed."""

    RELATIVE = "relative"
    RAW = "raw"


class DissimilarityMetric(StrEnum):
    """Distance between two deviation vectors."""

    ONE_MINUS_PEARSON = "one_minus_pearson"
    EUCLIDEAN = "euclidean"


@dataclass(frozen=True, eq=False)
class StandardProfile:
    """Pooled kernel words and their reference frequencies."""

    words: tuple[str, ...]
    f: np.ndarray
    mode: FrequencyMode = FrequencyMode.RELATIVE

    @property
    def K(self) -> int:
        return len(self.words)


@dataclass(frozen=True, eq=False)
class DeviationVector:
    """A work's kernel frequencies minus the standard profile."""

    work_id: str
    author_id: str
    d: np.ndarray


@dataclass(frozen=True, eq=False)
class DissimilarityMatrix:
    """Symmetric, zero-diagonal matrix of pairwise work dissimilarities."""

    values: np.ndarray
    work_ids: tuple[str, ...]
    author_ids: tuple[str, ...]
    metric: DissimilarityMetric

    @property
    def n(self) -> int:
        return len(self.work_ids)

    def reordered(self, order: Sequence[int]) -> DissimilarityMatrix:
        """Permute rows, columns and labels together."""
        index = np.asarray(order)
        return DissimilarityMatrix(
            values=self.values[np.ix_(index, index)],
            work_ids=tuple(self.work_ids[i] for i in index),
            author_ids=tuple(self.author_ids[i] for i in index),
            metric=self.metric,
        )


@dataclass(frozen=True)
class NullSummary:
    """Summary of the permutation distribution of R."""

    mean: float
    sd: float
    max: float


@dataclass(frozen=True)
class AnosimResult:
    """ANOSIM statistic and its permutation p-value."""

    R: float
    p_value: float
    n_permutations: int
    seed: int
    null_distribution_summary: NullSummary
    exact: bool = False
    n_groups: int = 0
    group_sizes: dict[str, int] = field(default_factory=dict)


def standard_profile(
    works: Sequence[FrequencyTable],
    K: int = DEFAULT_KERNEL_SIZE,
    mode: FrequencyMode | str = FrequencyMode.RELATIVE,
) -> StandardProfile:
    """Pool all works and take their top-K words as the reference.

    In relative mode f_i is the pooled relative frequency of word i; in raw
    mode it is the pooled count divided by the number of works.

    Raises:
        ParameterError: If no works are given
    """
    mode = FrequencyMode(mode)
    if not works:
        raise ParameterError("A standard profile needs at least one work")
    pooled = merge_all(works)
    kernel = table_kernel(pooled, K)
    words = tuple(member.word for member in kernel.members)
    if mode is FrequencyMode.RELATIVE:
        f = np.array([member.relative_frequency for member in kernel.members])
    else:
        f = np.array([pooled[word] / len(works) for word in words], dtype=float)
    return StandardProfile(words=words, f=f, mode=mode)


def deviation_vector(
    work: FrequencyTable,
    profile: StandardProfile,
    work_id: str = "",
    author_id: str = "",
) -> DeviationVector:
    """Compute d_i = q_i - f_i over the profile words.

    Words absent from the work contribute -f_i.

    Raises:
        ParameterError: If the work is empty
    """
    if not work.total_tokens:
        raise ParameterError(f"Work '{work_id}' has no tokens")
    raw = np.array([work[word] for word in profile.words], dtype=float)
    q = raw / work.total_tokens if profile.mode is FrequencyMode.RELATIVE else raw
    return DeviationVector(work_id=work_id, author_id=author_id, d=q - profile.f)


def dissimilarity_matrix(
    vectors: Sequence[DeviationVector],
    metric: DissimilarityMetric | str = DissimilarityMetric.ONE_MINUS_PEARSON,
) -> DissimilarityMatrix:
    """Pairwise dissimilarities between deviation vectors.

    Raises:
        ParameterError: With fewer than 2 vectors or unequal lengths
        DegenerateVectorError: If a vector is constant under one_minus_pearson
    """
    metric = DissimilarityMetric(metric)
    if len(vectors) < 2:
        raise ParameterError(f"Need at least 2 vectors, got {len(vectors)}")
    if len({len(vector.d) for vector in vectors}) != 1:
        raise ParameterError("Deviation vectors differ in length")

    stacked = np.vstack([vector.d for vector in vectors])
    if metric is DissimilarityMetric.ONE_MINUS_PEARSON:
        for vector, row in zip(vectors, stacked, strict=True):
            if np.ptp(row) == 0:
                raise DegenerateVectorError(vector.work_id)
        values = 1.0 - np.corrcoef(stacked)
    else:
        values = distance.squareform(distance.pdist(stacked, metric="euclidean"))

    values = np.clip((values + values.T) / 2.0, 0.0, None)
    np.fill_diagonal(values, 0.0)
    return DissimilarityMatrix(
        values=values,
        work_ids=tuple(vector.work_id for vector in vectors),
        author_ids=tuple(vector.author_id for vector in vectors),
        metric=metric,
    )


def _encode_groups(author_ids: Sequence[str]) -> tuple[np.ndarray, dict[str, int]]:
    sizes = Counter(author_ids)
    if len(sizes) < 2:
        raise GroupingError(f"ANOSIM needs at least 2 groups, got {len(sizes)}")
    small = sorted(author for author, size in sizes.items() if size < 2)
    if small:
        raise GroupingError(f"Groups with fewer than 2 members: {', '.join(small)}")
    names = sorted(sizes)
    codes = np.array([names.index(author) for author in author_ids])
    return codes, {name: sizes[name] for name in names}


class _RStatistic:
    """Computes R for any labeling of a fixed dissimilarity matrix."""

    def __init__(self, values: np.ndarray) -> None:
        n = len(values)
        self.rows, self.cols = np.triu_indices(n, k=1)
        self.ranks = stats.rankdata(values[self.rows, self.cols], method="average")
        self.divisor = n * (n - 1) / 4.0

    def __call__(self, labels: np.ndarray) -> float:
        within = labels[self.rows] == labels[self.cols]
        r_within = self.ranks[within].mean()
        r_between = self.ranks[~within].mean()
        return float((r_between - r_within) / self.divisor)


def distinct_partitions(sizes: Sequence[int]) -> int:
    """Number of ways to split n items into unlabeled groups of the given sizes."""
    n = sum(sizes)
    total = math.factorial(n)
    for size in sizes:
        total //= math.factorial(size)
    for multiplicity in Counter(sizes).values():
        total //= math.factorial(multiplicity)
    return total


def _enumerate_partitions(
    items: tuple[int, ...], sizes: Counter[int]
) -> Iterator[list[tuple[int, ...]]]:
    """Yield every partition of ``items`` into blocks with the given sizes.

    The block holding the smallest remaining item is always built first,
    so blocks of equal size are never produced twice in different orders.
    """
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for size in sorted(sizes):
        if not sizes[size]:
            continue
        for others in combinations(rest, size - 1):
            remaining = tuple(item for item in rest if item not in others)
            sizes[size] -= 1
            for tail in _enumerate_partitions(remaining, sizes):
                yield [(first, *others), *tail]
            sizes[size] += 1


def _labels_from_partition(partition: list[tuple[int, ...]], n: int) -> np.ndarray:
    labels = np.empty(n, dtype=int)
    for group, block in enumerate(partition):
        labels[list(block)] = group
    return labels


def _evaluate(
    statistic: _RStatistic, labelings: list[np.ndarray], threads: int
) -> np.ndarray:
    # Labelings are drawn up front, so chunking never changes the values
    chunks = np.array_split(np.arange(len(labelings)), max(1, min(threads, len(labelings))))

    def run(chunk: np.ndarray) -> list[float]:
        return [statistic(labelings[i]) for i in chunk]

    parts = parallel_map(run, chunks, threads)
    return np.array([value for part in parts for value in part], dtype=float)


def anosim(
    matrix: DissimilarityMatrix,
    n_permutations: int = DEFAULT_PERMUTATIONS,
    seed: int = 0,
    threads: int = 1,
) -> AnosimResult:
    """Analysis of similarities with author_id as the grouping.

    All n(n-1)/2 dissimilarities are ranked (ties get average ranks) and
    R = (mean between-group rank - mean within-group rank) / (n(n-1)/4).
    Significance comes from label permutations with
    p = (#{permuted R >= R} + 1) / (n_permutations + 1). When the number of
    distinct groupings does not exceed ``n_permutations`` they are all
    enumerated instead and ``exact`` is set.

    Raises:
        ParameterError: If n_permutations < 99
        GroupingError: With fewer than 2 groups or a group of 1
    """
    if n_permutations < MIN_PERMUTATIONS:
        raise ParameterError(
            f"n_permutations must be at least {MIN_PERMUTATIONS}, got {n_permutations}"
        )
    labels, group_sizes = _encode_groups(matrix.author_ids)
    statistic = _RStatistic(matrix.values)
    observed = statistic(labels)
    n = matrix.n

    n_partitions = distinct_partitions(list(group_sizes.values()))
    exact = n_partitions <= n_permutations
    if exact:
        # The observed grouping is the statistic itself, not a null draw
        observed_key = _partition_key(labels)
        labelings: list[np.ndarray] = []
        for partition in _enumerate_partitions(tuple(range(n)), Counter(group_sizes.values())):
            if frozenset(frozenset(block) for block in partition) != observed_key:
                labelings.append(_labels_from_partition(partition, n))
    else:
        rng = np.random.default_rng(seed % 2**64)
        labelings = [rng.permutation(labels) for _ in range(n_permutations)]

    null = _evaluate(statistic, labelings, threads)
    hits = int(np.count_nonzero(null >= observed - _R_TOLERANCE))
    permutations = len(labelings)
    if permutations:
        summary = NullSummary(
            mean=float(null.mean()), sd=float(null.std()), max=float(null.max())
        )
    else:
        summary = NullSummary(mean=math.nan, sd=math.nan, max=math.nan)

    return AnosimResult(
        R=observed,
        p_value=(hits + 1) / (permutations + 1),
        n_permutations=permutations,
        seed=seed,
        null_distribution_summary=summary,
        exact=exact,
        n_groups=len(group_sizes),
        group_sizes=group_sizes,
    )


def _partition_key(labels: np.ndarray) -> frozenset[frozenset[int]]:
    blocks: dict[int, set[int]] = {}
    for index, label in enumerate(labels.tolist()):
        blocks.setdefault(label, set()).add(index)
    return frozenset(frozenset(block) for block in blocks.values())


@dataclass(frozen=True)
class WorkSource:
    """One work of the style corpus; ``open_tokens`` streams its tokens."""

    author_id: str
    work_id: str
    open_tokens: Callable[[], Iterable[str]]


@dataclass(frozen=True)
class StyleReport:
    """Outputs of the end-to-end style pipeline."""

    result: AnosimResult
    matrix: DissimilarityMatrix
    profile: StandardProfile
    excluded_works: tuple[str, ...] = ()


def style_report(
    works: Sequence[WorkSource],
    K: int = DEFAULT_KERNEL_SIZE,
    metric: DissimilarityMetric | str = DissimilarityMetric.ONE_MINUS_PEARSON,
    n_permutations: int = DEFAULT_PERMUTATIONS,
    seed: int = 0,
    min_work_tokens: int = DEFAULT_MIN_WORK_TOKENS,
    mode: FrequencyMode | str = FrequencyMode.RELATIVE,
    threads: int = 1,
) -> StyleReport:
    """Count works, build the profile and vectors, then run ANOSIM.

    Works are ordered by (author_id, work_id) so each author's works sit
    together in the matrix. Works shorter than ``min_work_tokens`` are
    dropped with a warning.

    Raises:
        GroupingError: Unless at least 2 authors keep 3 or more works each
    """
    ordered = sorted(works, key=lambda work: (work.author_id, work.work_id))
    keys = Counter((work.author_id, work.work_id) for work in ordered)
    duplicates = sorted(key for key, n in keys.items() if n > 1)
    if duplicates:
        raise ParameterError(f"Duplicate works in corpus: {duplicates}")

    def tally(work: WorkSource) -> FrequencyTable:
        table = count(work.open_tokens())
        logger.debug(
            "Counted %d tokens",
            table.total_tokens,
            extra={"work_id": work.work_id, "author_id": work.author_id},
        )
        return table

    tables = parallel_map(tally, ordered, threads)

    kept: list[tuple[WorkSource, FrequencyTable]] = []
    excluded: list[str] = []
    for work, table in zip(ordered, tables, strict=True):
        if table.total_tokens < min_work_tokens:
            logger.warning(
                "Excluding work with %d tokens (minimum %d)",
                table.total_tokens,
                min_work_tokens,
                extra={"work_id": work.work_id, "author_id": work.author_id},
            )
            excluded.append(work.work_id)
            continue
        kept.append((work, table))

    per_author = Counter(work.author_id for work, _ in kept)
    short = sorted(author for author, n in per_author.items() if n < MIN_WORKS_PER_AUTHOR)
    if short:
        raise GroupingError(
            f"Authors with fewer than {MIN_WORKS_PER_AUTHOR} usable works: {', '.join(short)}"
        )
    if len(per_author) < 2:
        raise GroupingError(f"Style comparison needs at least 2 authors, got {len(per_author)}")

    profile = standard_profile([table for _, table in kept], K, mode)
    vectors = [
        deviation_vector(table, profile, work_id=work.work_id, author_id=work.author_id)
        for work, table in kept
    ]
    matrix = dissimilarity_matrix(vectors, metric)
    result = anosim(matrix, n_permutations=n_permutations, seed=seed, threads=threads)
    logger.info("ANOSIM R=%.4f p=%.4f over %d works", result.R, result.p_value, matrix.n)
    return StyleReport(
        result=result,
        matrix=matrix,
        profile=profile,
        excluded_works=tuple(excluded),
    )


def heatmap_rows(matrix: DissimilarityMatrix) -> list[tuple[str, str, str, str, float, float]]:
    """Long-form cells of the work-by-work heatmap.

    Each row is (work_i, author_i, work_j, author_j, dissimilarity,
    similarity). Similarity is the Pearson correlation 1 - d under
    one_minus_pearson and 1 / (1 + d) under euclidean.
    """
    rows = []
    for i in range(matrix.n):
        for j in range(matrix.n):
            value = float(matrix.values[i, j])
            if matrix.metric is DissimilarityMetric.ONE_MINUS_PEARSON:
                similarity = 1.0 - value
            else:
                similarity = 1.0 / (1.0 + value)
            rows.append(
                (
                    matrix.work_ids[i],
                    matrix.author_ids[i],
                    matrix.work_ids[j],
                    matrix.author_ids[j],
                    value,
                    similarity,
                )
            )
    return rows
