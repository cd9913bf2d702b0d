"""Power-law fits of rank-frequency curves and the two-regime bend.

Fits are ordinary least squares on (ln rank, ln frequency) over curves that
leave out rare words and keep log-spaced ranks. Segmented fits search a grid
of candidate breakpoint ranks exhaustively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import StrEnum
from itertools import combinations
from typing import TYPE_CHECKING

import numpy as np
from scipy import stats

from kernel_lexicon.errors import EmptyInputError, FitError, ParameterError
from kernel_lexicon.frequency.table import RankedDistribution
from kernel_lexicon.utils.logging import get_logger

if TYPE_CHECKING:
    from collections.abc import Sequence

    from kernel_lexicon.frequency.table import FrequencyTable

logger = get_logger(__name__)

MIN_SEGMENT_POINTS = 3
DEFAULT_GRID_POINTS = 60
DEFAULT_GRID_MIN_RANK = 10
# Counts below this are left out of fits
DEFAULT_MIN_COUNT = 3
DEFAULT_CURVE_POINTS = 200
# Below this one-segment SSE a curve counts as an exact power law
_SSE_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class RankCurve:
    """Rank/frequency arrays ready for log-log fitting."""

    ranks: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.ranks.shape != self.values.shape or self.ranks.ndim != 1:
            raise ParameterError("ranks and values must be 1-D arrays of equal length")
        if len(self.ranks) and np.any(self.values <= 0):
            raise ParameterError("All frequencies must be positive for a log-log fit")

    def __len__(self) -> int:
        return len(self.ranks)

    @property
    def max_rank(self) -> int:
        """Last rank on the curve, 0 when empty."""
        return int(self.ranks[-1]) if len(self.ranks) else 0

    @classmethod
    def from_ranked(
        cls,
        ranked: RankedDistribution,
        relative: bool = False,
        min_count: int = DEFAULT_MIN_COUNT,
        points: int | None = DEFAULT_CURVE_POINTS,
    ) -> RankCurve:
        """Build a fitting curve from a ranked distribution.

        The tail of ranks with counts below ``min_count`` is dropped and the
        rest is thinned to about ``points`` log-spaced ranks, so that each
        decade of ranks weighs roughly the same in a least-squares fit.

        Args:
            ranked: Ranked distribution
            relative: Use relative frequencies instead of raw counts
            min_count: Drop the tail of ranks with counts below this value
            points: Log-spaced ranks to keep; None keeps every rank
        """
        keep = ranked.counts >= min_count
        values = ranked.counts[keep]
        if relative:
            values = values / ranked.total_tokens
        curve = cls(ranks=ranked.ranks[keep], values=values)
        return curve if points is None else curve.log_spaced(points)

    def log_spaced(self, points: int) -> RankCurve:
        """Thin the curve to ranks nearest ``points`` log-spaced targets.

        The first and last ranks are always kept. Curves with no more than
        ``points`` ranks are returned unchanged.

        Raises:
            ParameterError: If points is below 3
        """
        if points < MIN_SEGMENT_POINTS:
            raise ParameterError(f"points must be >= {MIN_SEGMENT_POINTS}, got {points}")
        if len(self) <= points:
            return self
        targets = np.round(np.geomspace(self.ranks[0], self.ranks[-1], points))
        index = np.unique(np.searchsorted(self.ranks, targets, side="left"))
        index = index[index < len(self)]
        return RankCurve(ranks=self.ranks[index], values=self.values[index])

    @classmethod
    def from_values(cls, values: Sequence[float] | np.ndarray) -> RankCurve:
        """Build a curve from values already in rank order (ranks 1..n)."""
        array = np.asarray(values, dtype=float)
        return cls(ranks=np.arange(1, len(array) + 1, dtype=float), values=array)


@dataclass(frozen=True)
class PowerLawFit:
    """Straight-line fit in log-log space."""

    exponent: float
    log_intercept: float
    sse: float
    r_squared: float
    fit_range: tuple[int, int]

    def predict(self, ranks: np.ndarray) -> np.ndarray:
        """Fitted frequencies at the given ranks."""
        return np.exp(self.log_intercept) * np.power(ranks, self.exponent)


@dataclass(frozen=True)
class Segment:
    """One contiguous rank interval of a segmented fit."""

    rank_lo: int
    rank_hi: int
    fit: PowerLawFit


@dataclass(frozen=True)
class SegmentedFit:
    """Piecewise power-law fit with breakpoints from a candidate grid."""

    segments: tuple[Segment, ...]
    total_sse: float

    @property
    def n_segments(self) -> int:
        return len(self.segments)

    @property
    def breakpoints(self) -> list[int]:
        """First rank of every segment after the first."""
        return [segment.rank_lo for segment in self.segments[1:]]


def _as_curve(data: RankedDistribution | RankCurve) -> RankCurve:
    if isinstance(data, RankedDistribution):
        return RankCurve.from_ranked(data)
    return data


def _ols(log_x: np.ndarray, log_y: np.ndarray) -> tuple[float, float, float, float]:
    """Return slope, intercept, SSE and R² of an OLS line."""
    result = stats.linregress(log_x, log_y)
    slope = float(result.slope)
    intercept = float(result.intercept)
    residuals = log_y - (intercept + slope * log_x)
    sse = float(np.dot(residuals, residuals))
    centered = log_y - log_y.mean()
    total_variance = float(np.dot(centered, centered))
    if total_variance > 0:
        r_squared = min(1.0, max(0.0, 1.0 - sse / total_variance))
    else:
        r_squared = 1.0
    return slope, intercept, sse, r_squared


def _fit_slice(curve: RankCurve, start: int, stop: int) -> PowerLawFit:
    log_x = np.log(curve.ranks[start:stop])
    log_y = np.log(curve.values[start:stop])
    slope, intercept, sse, r_squared = _ols(log_x, log_y)
    return PowerLawFit(
        exponent=slope,
        log_intercept=intercept,
        sse=sse,
        r_squared=r_squared,
        fit_range=(int(curve.ranks[start]), int(curve.ranks[stop - 1])),
    )


def loglog_fit(
    ranked: RankedDistribution | RankCurve,
    rank_range: tuple[int, int] | None = None,
) -> PowerLawFit:
    """Fit ln(frequency) = a + b·ln(rank) over a rank range.

    Args:
        ranked: Ranked distribution or rank curve
        rank_range: Inclusive (rank_lo, rank_hi); the whole curve by default

    Returns:
        Fit whose exponent is the slope b

    Raises:
        FitError: If the range holds fewer than 3 ranks or constant frequencies
    """
    curve = _as_curve(ranked)
    if rank_range is None:
        start, stop = 0, len(curve)
    else:
        rank_lo, rank_hi = rank_range
        if rank_lo < 1 or rank_hi < rank_lo:
            raise ParameterError(f"Invalid rank range: {rank_range}")
        start = int(np.searchsorted(curve.ranks, rank_lo, side="left"))
        stop = int(np.searchsorted(curve.ranks, rank_hi, side="right"))

    if stop - start < MIN_SEGMENT_POINTS:
        raise FitError(f"Rank range {rank_range} holds {stop - start} points, need at least 3")
    if np.all(curve.values[start:stop] == curve.values[start]):
        raise FitError(f"All frequencies in rank range {rank_range} are equal")
    return _fit_slice(curve, start, stop)


def default_grid(
    n_ranks: int,
    points: int = DEFAULT_GRID_POINTS,
    min_rank: int = DEFAULT_GRID_MIN_RANK,
) -> list[int]:
    """Log-spaced candidate breakpoint ranks between ``min_rank`` and n_ranks/2.

    Raises:
        ParameterError: If points is not positive
        FitError: If the vocabulary is too small for a grid above ``min_rank``
    """
    if points < 1:
        raise ParameterError(f"Breakpoint grid needs at least one point, got {points}")
    upper = n_ranks // 2
    if upper <= min_rank:
        raise FitError(
            f"Vocabulary of {n_ranks} ranks is too small for a breakpoint grid "
            f"from rank {min_rank}"
        )
    grid = np.unique(np.round(np.geomspace(min_rank, upper, points)).astype(int))
    return [int(rank) for rank in grid]


def _grid_positions(curve: RankCurve, grid: Sequence[int]) -> list[int]:
    """Map breakpoint ranks to the index of the first point of each new segment."""
    if any(b >= a for a, b in zip(grid[1:], grid, strict=False)):
        raise ParameterError("Breakpoint grid must be strictly increasing")
    first, last = curve.ranks[0], curve.ranks[-1]
    if grid and (grid[0] <= first or grid[-1] > last):
        raise ParameterError(
            f"Breakpoint grid [{grid[0]}, {grid[-1]}] lies outside ranks ({first:.0f}, {last:.0f}]"
        )
    positions = [int(np.searchsorted(curve.ranks, rank, side="left")) for rank in grid]
    # Distinct grid ranks can collapse onto one point after tail truncation
    return sorted(set(positions))


def _search(curve: RankCurve, positions: list[int], n_segments: int) -> tuple[int, ...] | None:
    """Exhaustively find the breakpoint positions with minimum total SSE."""
    n = len(curve)
    log_x = np.log(curve.ranks)
    log_y = np.log(curve.values)
    cache: dict[tuple[int, int], float] = {}

    def segment_sse(start: int, stop: int) -> float:
        key = (start, stop)
        if key not in cache:
            cache[key] = _ols(log_x[start:stop], log_y[start:stop])[2]
        return cache[key]

    best: tuple[int, ...] | None = None
    best_sse = math.inf
    # combinations() is lexicographic, so strict improvement keeps the
    # smallest first breakpoint among equal totals
    for cut in combinations(positions, n_segments - 1):
        bounds = (0, *cut, n)
        spans = list(zip(bounds, bounds[1:], strict=False))
        if any(stop - start < MIN_SEGMENT_POINTS for start, stop in spans):
            continue
        total = sum(segment_sse(start, stop) for start, stop in spans)
        if total < best_sse:
            best_sse = total
            best = cut
    logger.debug("Evaluated %d distinct segments for %d-segment search", len(cache), n_segments)
    return best


def segmented_fit(
    ranked: RankedDistribution | RankCurve,
    n_segments: int = 2,
    grid: Sequence[int] | None = None,
) -> SegmentedFit:
    """Fit 1 to 3 contiguous power-law segments.

    A breakpoint rank b starts a new segment at rank b. Every combination of
    grid breakpoints leaving at least 3 points per segment is evaluated; the
    minimum total SSE wins, ties going to the smallest first breakpoint. The
    result never has a larger total SSE than the best fit with one segment
    fewer.

    Raises:
        ParameterError: If n_segments is not 1, 2 or 3, or the grid is infeasible
        FitError: If the curve is too short for the default grid
    """
    if n_segments not in (1, 2, 3):
        raise ParameterError(f"n_segments must be 1, 2 or 3, got {n_segments}")
    curve = _as_curve(ranked)

    if n_segments == 1:
        fit = loglog_fit(curve)
        return SegmentedFit(
            segments=(Segment(fit.fit_range[0], fit.fit_range[1], fit),),
            total_sse=fit.sse,
        )

    if grid is None:
        grid = default_grid(curve.max_rank)
    positions = _grid_positions(curve, list(grid))
    cut = _search(curve, positions, n_segments)
    if cut is None:
        raise ParameterError(
            f"No grid placement yields {n_segments} segments of at least "
            f"{MIN_SEGMENT_POINTS} points"
        )

    bounds = (0, *cut, len(curve))
    segments = []
    for start, stop in zip(bounds, bounds[1:], strict=False):
        fit = _fit_slice(curve, start, stop)
        segments.append(Segment(fit.fit_range[0], fit.fit_range[1], fit))
    result = SegmentedFit(
        segments=tuple(segments),
        total_sse=sum(segment.fit.sse for segment in segments),
    )

    try:
        fewer = segmented_fit(curve, n_segments - 1, grid)
    except (FitError, ParameterError):
        return result
    return fewer if fewer.total_sse < result.total_sse else result


def bending_score(
    ranked: RankedDistribution | RankCurve,
    grid: Sequence[int] | None = None,
) -> float:
    """Share of one-segment SSE removed by the best two-segment fit.

    0 means a single power law explains the curve as well as two; values
    near 1 mean a strong bend.
    """
    curve = _as_curve(ranked)
    one = segmented_fit(curve, 1)
    if one.total_sse <= _SSE_FLOOR:
        return 0.0
    two = segmented_fit(curve, 2, grid)
    return min(1.0, max(0.0, 1.0 - two.total_sse / one.total_sse))


def plot_rows(
    ranked: RankedDistribution | RankCurve,
    fit: SegmentedFit,
) -> list[tuple[int, int, float, float]]:
    """Rows of (segment, rank, value, fitted value) for external plotting."""
    curve = _as_curve(ranked)
    rows: list[tuple[int, int, float, float]] = []
    for index, segment in enumerate(fit.segments, start=1):
        mask = (curve.ranks >= segment.rank_lo) & (curve.ranks <= segment.rank_hi)
        ranks = curve.ranks[mask]
        fitted = segment.fit.predict(ranks)
        rows.extend(
            (index, int(r), float(v), float(f))
            for r, v, f in zip(ranks, curve.values[mask], fitted, strict=True)
        )
    return rows


class LengthWeighting(StrEnum):
    """Whether word lengths are weighted by occurrences or by distinct words."""

    BY_TOKEN = "by_token"
    BY_TYPE = "by_type"


@dataclass(frozen=True)
class LengthHistogram:
    """Probability mass over word lengths in characters."""

    bins: dict[int, float]
    weighting: LengthWeighting
    observations: int


def word_length_distribution(
    table: FrequencyTable,
    weighting: LengthWeighting | str = LengthWeighting.BY_TOKEN,
) -> LengthHistogram:
    """Distribution of word lengths in a frequency table.

    Raises:
        EmptyInputError: If the table is empty
    """
    weighting = LengthWeighting(weighting)
    if not table.vocabulary_size:
        raise EmptyInputError("Cannot compute word lengths of an empty table")

    mass: dict[int, int] = {}
    for word, value in table.counts.items():
        weight = value if weighting is LengthWeighting.BY_TOKEN else 1
        mass[len(word)] = mass.get(len(word), 0) + weight

    observations = sum(mass.values())
    bins = {length: mass[length] / observations for length in sorted(mass)}
    return LengthHistogram(bins=bins, weighting=weighting, observations=observations)


@dataclass(frozen=True)
class LengthBinCheck:
    """Observed versus expected mass for one word length."""

    length: int
    observed: float
    expected: float
    standard_error: float

    @property
    def z_score(self) -> float:
        if self.standard_error == 0:
            return 0.0 if self.observed == self.expected else math.inf
        return (self.observed - self.expected) / self.standard_error


def length_law_agreement(
    histogram: LengthHistogram,
    expected: dict[int, float],
) -> list[LengthBinCheck]:
    """Compare a histogram against a reference law bin by bin.

    Standard errors are binomial, sqrt(p(1-p)/n), with n the histogram's
    observation count. Lengths present in either distribution are checked.
    """
    n = histogram.observations
    lengths = sorted(set(histogram.bins) | set(expected))
    checks = []
    for length in lengths:
        p = expected.get(length, 0.0)
        checks.append(
            LengthBinCheck(
                length=length,
                observed=histogram.bins.get(length, 0.0),
                expected=p,
                standard_error=math.sqrt(p * (1.0 - p) / n),
            )
        )
    return checks
