"""Frequency tables, ranked distributions and kernel lexicons."""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Mapping
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property, reduce
from pathlib import Path
from types import MappingProxyType
from typing import TYPE_CHECKING, TypeVar

import numpy as np

from kernel_lexicon.errors import (
    CountOverflowError,
    EmptyInputError,
    FormatError,
    IngestError,
    ParameterError,
)
from kernel_lexicon.utils.atomic import atomic_write

if TYPE_CHECKING:
    from collections.abc import Callable, Iterator, Sequence

    from kernel_lexicon.ingest.readers import YearedCount


DEFAULT_KERNEL_SIZE = 3000
MAX_COUNT = 2**63 - 1
TSV_HEADER = "#total_tokens"

T = TypeVar("T")
R = TypeVar("R")


class FrequencyTable:
    """Word counts together with the total number of tokens.

    Instances are treated as immutable values: no zero counts are stored and
    ``total_tokens`` always equals the sum of the counts.
    """

    __slots__ = ("_counts", "_total")

    def __init__(self, counts: Mapping[str, int] | None = None) -> None:
        cleaned: dict[str, int] = {}
        total = 0
        for word, value in (counts or {}).items():
            if value < 0:
                raise ParameterError(f"Negative count for {word!r}: {value}")
            if value:
                cleaned[word] = int(value)
                total += int(value)
        if total > MAX_COUNT:
            raise CountOverflowError(f"Token total {total} exceeds the 64-bit counter range")
        self._counts = cleaned
        self._total = total

    @property
    def counts(self) -> Mapping[str, int]:
        """Read-only view of word counts."""
        return MappingProxyType(self._counts)

    @property
    def total_tokens(self) -> int:
        """Sum of all counts."""
        return self._total

    @property
    def vocabulary_size(self) -> int:
        """Number of distinct words."""
        return len(self._counts)

    def __len__(self) -> int:
        return len(self._counts)

    def __contains__(self, word: object) -> bool:
        return word in self._counts

    def __getitem__(self, word: str) -> int:
        return self._counts.get(word, 0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FrequencyTable):
            return NotImplemented
        return self._counts == other._counts

    def __hash__(self) -> int:
        return hash(frozenset(self._counts.items()))

    def __add__(self, other: FrequencyTable) -> FrequencyTable:
        return merge(self, other)

    def __repr__(self) -> str:
        return f"FrequencyTable(words={len(self._counts)}, total_tokens={self._total})"

    def relative_frequency(self, word: str) -> float:
        """Count of ``word`` divided by the total, 0.0 for unseen words."""
        if not self._total:
            return 0.0
        return self._counts.get(word, 0) / self._total

    def write_tsv(self, path: Path | str) -> None:
        """Write the table as ``word<TAB>count`` lines in rank order.

        The first line carries the total token count.
        """
        lines = [f"{TSV_HEADER}\t{self._total}"]
        lines.extend(f"{word}\t{count}" for word, count in _rank_order(self._counts))
        atomic_write(path, "\n".join(lines) + "\n")

    @classmethod
    def read_tsv(cls, path: Path | str) -> FrequencyTable:
        """Read a table written by ``write_tsv``.

        Raises:
            FormatError: If the header is missing or the total does not match
        """
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise IngestError(f"Cannot read table: {e.strerror}", source=str(path)) from e
        except UnicodeDecodeError as e:
            raise IngestError("Invalid UTF-8 in table", str(path), e.start) from e

        lines = text.splitlines()
        if not lines or not lines[0].startswith(f"{TSV_HEADER}\t"):
            raise FormatError("Missing total_tokens header", str(path), 1)
        try:
            declared = int(lines[0].split("\t", 1)[1])
        except ValueError as e:
            raise FormatError("Invalid total_tokens header", str(path), 1) from e

        counts: dict[str, int] = {}
        for number, line in enumerate(lines[1:], start=2):
            word, sep, value = line.rpartition("\t")
            if not sep or not word:
                raise FormatError("Expected word<TAB>count", str(path), number)
            try:
                counts[word] = int(value)
            except ValueError as e:
                raise FormatError("Invalid count", str(path), number) from e

        table = cls(counts)
        if table.total_tokens != declared:
            raise FormatError(
                f"Declared total {declared} differs from summed counts {table.total_tokens}",
                str(path),
            )
        return table


def _rank_order(counts: Mapping[str, int]) -> list[tuple[str, int]]:
    """Sort by descending count, ties by ascending word."""
    return sorted(counts.items(), key=lambda item: (-item[1], item[0]))


def count(tokens: Iterable[str]) -> FrequencyTable:
    """Tally a token stream.

    Args:
        tokens: Any iterable of tokens, consumed once

    Returns:
        Table with one entry per distinct token
    """
    return FrequencyTable(Counter(tokens))


def merge(a: FrequencyTable, b: FrequencyTable) -> FrequencyTable:
    """Sum two tables word by word.

    Raises:
        CountOverflowError: If the merged total leaves the 64-bit range
    """
    if a.total_tokens + b.total_tokens > MAX_COUNT:
        raise CountOverflowError("Merged token total exceeds the 64-bit counter range")
    merged = Counter(a.counts)
    merged.update(b.counts)
    return FrequencyTable(merged)


def merge_all(tables: Iterable[FrequencyTable]) -> FrequencyTable:
    """Fold ``merge`` over tables in order."""
    return reduce(merge, tables, FrequencyTable())


def parallel_map(function: Callable[[T], R], items: Sequence[T], threads: int = 1) -> list[R]:
    """Apply ``function`` to every item, keeping input order in the result.

    Raises:
        ParameterError: If threads is not positive
    """
    if threads < 1:
        raise ParameterError(f"threads must be positive, got {threads}")
    if threads == 1 or len(items) <= 1:
        return [function(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(function, items))


def count_sources(
    sources: Sequence[Callable[[], Iterable[str]]],
    threads: int = 1,
) -> list[FrequencyTable]:
    """Count several token sources, optionally in parallel.

    Each source is a zero-argument callable returning a token iterable, so
    it is opened inside the worker. Results keep the order of ``sources``.
    """
    return parallel_map(lambda open_tokens: count(open_tokens()), sources, threads)


def collapse_years(records: Iterable[YearedCount]) -> FrequencyTable:
    """Sum yearly 1-gram records into one table, ignoring the year."""
    totals: Counter[str] = Counter()
    for record in records:
        totals[record.word] += record.count
    return FrequencyTable(totals)


@dataclass(frozen=True)
class RankedEntry:
    """One row of a ranked distribution."""

    rank: int
    word: str
    count: int
    relative_frequency: float


@dataclass(frozen=True)
class RankedDistribution:
    """Words sorted by descending count with ascending-word tie-break."""

    entries: tuple[RankedEntry, ...]
    total_tokens: int

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[RankedEntry]:
        return iter(self.entries)

    @cached_property
    def ranks(self) -> np.ndarray:
        """1-based ranks as a float array."""
        return np.arange(1, len(self.entries) + 1, dtype=float)

    @cached_property
    def counts(self) -> np.ndarray:
        """Counts in rank order as a float array."""
        return np.array([entry.count for entry in self.entries], dtype=float)

    @property
    def words(self) -> list[str]:
        """Words in rank order."""
        return [entry.word for entry in self.entries]


def rank(table: FrequencyTable) -> RankedDistribution:
    """Rank a table's words.

    Raises:
        EmptyInputError: If the table has no words
    """
    if not table.vocabulary_size:
        raise EmptyInputError("Cannot rank an empty frequency table")
    total = table.total_tokens
    entries = tuple(
        RankedEntry(rank=i, word=word, count=value, relative_frequency=value / total)
        for i, (word, value) in enumerate(_rank_order(table.counts), start=1)
    )
    return RankedDistribution(entries=entries, total_tokens=total)


@dataclass(frozen=True)
class KernelMember:
    """A kernel lexicon word with its rank and relative frequency."""

    word: str
    rank: int
    relative_frequency: float


@dataclass(frozen=True)
class KernelLexicon:
    """The K most frequent words of a corpus."""

    K: int
    members: tuple[KernelMember, ...]
    _index: dict[str, KernelMember] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_index", {member.word: member for member in self.members})

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, word: object) -> bool:
        return word in self._index

    @property
    def words(self) -> frozenset[str]:
        """Member words as a set."""
        return frozenset(self._index)

    def frequency_of(self, word: str) -> float:
        """Relative frequency of a member word."""
        return self._index[word].relative_frequency


def kernel_lexicon(ranked: RankedDistribution, K: int = DEFAULT_KERNEL_SIZE) -> KernelLexicon:
    """Take the first K entries of a ranked distribution.

    Raises:
        ParameterError: If K is not positive
    """
    if K < 1:
        raise ParameterError(f"Kernel size K must be positive, got {K}")
    members = tuple(
        KernelMember(word=entry.word, rank=entry.rank, relative_frequency=entry.relative_frequency)
        for entry in ranked.entries[:K]
    )
    return KernelLexicon(K=K, members=members)


def table_kernel(table: FrequencyTable, K: int = DEFAULT_KERNEL_SIZE) -> KernelLexicon:
    """Shortcut for ``kernel_lexicon(rank(table), K)``."""
    return kernel_lexicon(rank(table), K)
