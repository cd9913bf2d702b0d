"""Kernel lexicon similarity across years and language varieties."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from scipy import stats

from kernel_lexicon.errors import (
    EmptyResultError,
    InsufficientOverlapError,
    ParameterError,
    UndefinedCorrelationError,
)
from kernel_lexicon.frequency.table import (
    DEFAULT_KERNEL_SIZE,
    FrequencyTable,
    KernelLexicon,
    merge_all,
    parallel_map,
    table_kernel,
)
from kernel_lexicon.utils.logging import get_logger

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from kernel_lexicon.ingest.readers import YearedCount

logger = get_logger(__name__)

DEFAULT_INTERVALS = (1, 2, 4, 8, 16, 32, 64)
DEFAULT_SPAN = 5


@dataclass
class YearBinnedCorpus:
    """One frequency table per publication year."""

    bins: dict[int, FrequencyTable] = field(default_factory=dict)
    language_tag: str = ""

    @classmethod
    def from_records(
        cls, records: Iterable[YearedCount], language_tag: str = ""
    ) -> YearBinnedCorpus:
        """Group yearly 1-gram records into per-year tables."""
        per_year: defaultdict[int, dict[str, int]] = defaultdict(dict)
        for record in records:
            bucket = per_year[record.year]
            bucket[record.word] = bucket.get(record.word, 0) + record.count
        bins = {year: FrequencyTable(per_year[year]) for year in sorted(per_year)}
        return cls(bins=bins, language_tag=language_tag)

    @property
    def years(self) -> list[int]:
        """Years holding at least one token, ascending."""
        return sorted(year for year, table in self.bins.items() if table.total_tokens)

    def rebin(self, width: int) -> YearBinnedCorpus:
        """Pool consecutive years into bins of ``width`` years.

        Each pooled bin is keyed by its first year (year - year % width).
        """
        if width < 1:
            raise ParameterError(f"Bin width must be positive, got {width}")
        groups: defaultdict[int, list[FrequencyTable]] = defaultdict(list)
        for year in sorted(self.bins):
            groups[year - year % width].append(self.bins[year])
        return YearBinnedCorpus(
            bins={start: merge_all(groups[start]) for start in sorted(groups)},
            language_tag=self.language_tag,
        )


@dataclass(frozen=True)
class DriftPoint:
    """Both similarity indices for one pair of years."""

    year_a: int
    year_b: int
    interval: int
    cosine: float
    spearman: float
    shared_words: int


@dataclass(frozen=True)
class VarietyPoint:
    """Similarity of two varieties' kernels in one year."""

    year: int
    cosine: float
    spearman: float
    shared_words: int


def cosine_set_similarity(a: KernelLexicon, b: KernelLexicon) -> float:
    """Intersection size over the geometric mean of the set sizes.

    Only word identity matters; frequencies are ignored.

    Raises:
        ParameterError: If either lexicon is empty
    """
    if not len(a) or not len(b):
        raise ParameterError("Cosine set similarity needs two non-empty lexicons")
    shared = len(a.words & b.words)
    return shared / math.sqrt(len(a) * len(b))


def _shared_ranks(a: KernelLexicon, b: KernelLexicon) -> tuple[np.ndarray, np.ndarray]:
    shared = sorted(a.words & b.words)
    freq_a = np.array([a.frequency_of(word) for word in shared])
    freq_b = np.array([b.frequency_of(word) for word in shared])
    # Highest frequency gets rank 1; ties share the average rank
    return stats.rankdata(-freq_a, method="average"), stats.rankdata(-freq_b, method="average")


def spearman_rho(a: KernelLexicon, b: KernelLexicon) -> tuple[float, int]:
    """Spearman rank correlation over the words both kernels share.

    Shared words are re-ranked 1..m on each side by frequency. Without ties
    rho = 1 - 6·Σd²/(m(m²-1)); with ties the Pearson correlation of the
    average-rank vectors is used. A side whose ranks are all tied gives NaN.

    Returns:
        (rho, number of shared words)

    Raises:
        InsufficientOverlapError: If fewer than 2 words are shared
    """
    ranks_a, ranks_b = _shared_ranks(a, b)
    m = len(ranks_a)
    if m < 2:
        raise InsufficientOverlapError(f"Kernels share {m} words, need at least 2")

    tie_free = len(np.unique(ranks_a)) == m and len(np.unique(ranks_b)) == m
    if tie_free:
        d = ranks_a - ranks_b
        rho = 1.0 - 6.0 * float(np.dot(d, d)) / (m * (m * m - 1))
    elif np.all(ranks_a == ranks_a[0]) or np.all(ranks_b == ranks_b[0]):
        rho = math.nan
    else:
        rho = float(np.corrcoef(ranks_a, ranks_b)[0, 1])
    if not math.isnan(rho):
        rho = min(1.0, max(-1.0, rho))
    return rho, m


def _compare(a: KernelLexicon, b: KernelLexicon) -> tuple[float, float, int]:
    cosine = cosine_set_similarity(a, b)
    try:
        rho, shared = spearman_rho(a, b)
    except InsufficientOverlapError:
        rho, shared = math.nan, len(a.words & b.words)
    return cosine, rho, shared


def drift_series(
    corpus: YearBinnedCorpus,
    K: int = DEFAULT_KERNEL_SIZE,
    intervals: Iterable[int] = DEFAULT_INTERVALS,
    threads: int = 1,
) -> list[DriftPoint]:
    """Compare kernels of every year pair (y, y + Δ) for each interval Δ.

    Pairs with a missing or empty bin are skipped. Spearman is NaN when the
    two kernels share fewer than 2 words.

    Returns:
        Points sorted by (interval, year_a)

    Raises:
        ParameterError: If an interval is not positive
        EmptyResultError: If no pair exists for any interval
    """
    interval_set = sorted(set(intervals))
    if not interval_set or interval_set[0] < 1:
        raise ParameterError(f"Intervals must be positive integers, got {interval_set}")

    years = corpus.years
    present = set(years)
    pairs = [
        (year, year + interval, interval)
        for interval in interval_set
        for year in years
        if year + interval in present
    ]
    if not pairs:
        raise EmptyResultError(
            f"No year pairs for intervals {interval_set} in corpus '{corpus.language_tag}'"
        )

    kernels = _kernels(corpus, sorted({y for pair in pairs for y in pair[:2]}), K, threads)

    def evaluate(pair: tuple[int, int, int]) -> DriftPoint:
        year_a, year_b, interval = pair
        cosine, rho, shared = _compare(kernels[year_a], kernels[year_b])
        return DriftPoint(year_a, year_b, interval, cosine, rho, shared)

    points = parallel_map(evaluate, pairs, threads)
    logger.info(
        "Computed %d drift points",
        len(points),
        extra={"language": corpus.language_tag},
    )
    return sorted(points, key=lambda point: (point.interval, point.year_a))


def _kernels(
    corpus: YearBinnedCorpus, years: Sequence[int], K: int, threads: int
) -> dict[int, KernelLexicon]:
    lexicons = parallel_map(lambda year: table_kernel(corpus.bins[year], K), years, threads)
    return dict(zip(years, lexicons, strict=True))


def index_correlation(series: Sequence[DriftPoint]) -> float:
    """Pearson correlation between the cosine and Spearman values of a series.

    Points are pooled across intervals; points with a NaN index are ignored.

    Raises:
        ParameterError: If fewer than 3 finite points remain
        UndefinedCorrelationError: If either index has zero variance
    """
    finite = [
        (point.cosine, point.spearman)
        for point in series
        if math.isfinite(point.cosine) and math.isfinite(point.spearman)
    ]
    if len(finite) < 3:
        raise ParameterError(f"Index correlation needs 3 finite points, got {len(finite)}")
    cosine = np.array([pair[0] for pair in finite])
    spearman = np.array([pair[1] for pair in finite])
    if np.ptp(cosine) == 0 or np.ptp(spearman) == 0:
        raise UndefinedCorrelationError("An index is constant across the series")
    return float(np.clip(stats.pearsonr(cosine, spearman)[0], -1.0, 1.0))


def moving_average(series: Sequence[float], span: int = DEFAULT_SPAN) -> list[float]:
    """Centered moving average whose window shrinks symmetrically at the edges.

    The first and last points use spans 1, 3, ... up to ``span``. Undefined
    (NaN) values are skipped inside each window; a point is NaN only when its
    whole window is.

    Raises:
        ParameterError: If span is not an odd positive integer or series is empty
    """
    if span < 1 or span % 2 == 0:
        raise ParameterError(f"span must be an odd positive integer, got {span}")
    if not len(series):
        raise ParameterError("Cannot smooth an empty series")
    values = np.asarray(series, dtype=float)
    n = len(values)
    half = span // 2
    smoothed = []
    for i in range(n):
        reach = min(half, i, n - 1 - i)
        window = values[i - reach : i + reach + 1]
        finite = window[np.isfinite(window)]
        smoothed.append(float(finite.mean()) if finite.size else math.nan)
    return smoothed


def cross_variety_series(
    a: YearBinnedCorpus,
    b: YearBinnedCorpus,
    K: int = DEFAULT_KERNEL_SIZE,
    threads: int = 1,
) -> list[VarietyPoint]:
    """Compare two varieties' kernels year by year.

    Raises:
        EmptyResultError: If the corpora share no year
    """
    shared_years = sorted(set(a.years) & set(b.years))
    if not shared_years:
        raise EmptyResultError(
            f"Corpora '{a.language_tag}' and '{b.language_tag}' share no year"
        )
    kernels_a = _kernels(a, shared_years, K, threads)
    kernels_b = _kernels(b, shared_years, K, threads)

    points = []
    for year in shared_years:
        cosine, rho, shared = _compare(kernels_a[year], kernels_b[year])
        points.append(VarietyPoint(year, cosine, rho, shared))
    return points


@dataclass(frozen=True)
class IntervalSummary:
    """Mean indices over all pairs at one interval."""

    interval: int
    pairs: int
    mean_cosine: float
    mean_spearman: float


def interval_summary(series: Sequence[DriftPoint]) -> list[IntervalSummary]:
    """Average both indices per interval; NaN Spearman values are skipped."""
    grouped: defaultdict[int, list[DriftPoint]] = defaultdict(list)
    for point in series:
        grouped[point.interval].append(point)

    summaries = []
    for interval in sorted(grouped):
        points = grouped[interval]
        rhos = [p.spearman for p in points if math.isfinite(p.spearman)]
        summaries.append(
            IntervalSummary(
                interval=interval,
                pairs=len(points),
                mean_cosine=float(np.mean([p.cosine for p in points])),
                mean_spearman=float(np.mean(rhos)) if rhos else math.nan,
            )
        )
    return summaries


def interval_trend(series: Sequence[DriftPoint]) -> float:
    """Spearman correlation between interval length and mean cosine.

    Strongly negative values mean similarity decays as the gap widens.

    Raises:
        UndefinedCorrelationError: With fewer than 3 intervals or constant means
    """
    summaries = interval_summary(series)
    if len(summaries) < 3:
        raise UndefinedCorrelationError(
            f"Interval trend needs at least 3 intervals, got {len(summaries)}"
        )
    means = [summary.mean_cosine for summary in summaries]
    if max(means) == min(means):
        raise UndefinedCorrelationError("Mean cosine is constant across intervals")
    intervals = [summary.interval for summary in summaries]
    return float(stats.spearmanr(intervals, means)[0])
