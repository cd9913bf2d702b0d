"""Pydantic models for JSON reports and the run manifest."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING, Literal

from pydantic import BaseModel, Field

if TYPE_CHECKING:
    from kernel_lexicon.analysis.drift import IntervalSummary
    from kernel_lexicon.analysis.stylometry import AnosimResult
    from kernel_lexicon.analysis.zipf import LengthBinCheck, PowerLawFit, SegmentedFit
    from kernel_lexicon.ingest.readers import ReadStats

MANIFEST_VERSION = 1


def finite(value: float) -> float | None:
    """NaN and infinities become null in reports."""
    return value if math.isfinite(value) else None


class SourceSummary(BaseModel):
    """One input file and what its reader saw."""

    path: str
    format: Literal["text", "leipzig", "google1gram"]
    label: str
    lines_read: int = 0
    malformed_lines: int = 0
    dropped_words: int = 0

    @classmethod
    def from_stats(cls, path: str, format: str, label: str, stats: ReadStats) -> SourceSummary:
        return cls(
            path=path,
            format=format,  # type: ignore[arg-type]
            label=label,
            lines_read=stats.lines_read,
            malformed_lines=stats.malformed_lines,
            dropped_words=stats.dropped_words,
        )


class FreqReport(BaseModel):
    """Summary of a counted corpus."""

    total_tokens: int
    vocabulary_size: int
    sources: list[SourceSummary] = Field(default_factory=list)


class PowerLawFitModel(BaseModel):
    """A log-log line over a rank range."""

    exponent: float
    log_intercept: float
    sse: float
    r_squared: float
    rank_lo: int
    rank_hi: int

    @classmethod
    def from_fit(cls, fit: PowerLawFit) -> PowerLawFitModel:
        return cls(
            exponent=fit.exponent,
            log_intercept=fit.log_intercept,
            sse=fit.sse,
            r_squared=fit.r_squared,
            rank_lo=fit.fit_range[0],
            rank_hi=fit.fit_range[1],
        )


class SegmentedFitModel(BaseModel):
    """Piecewise fit: segments in rank order plus total SSE."""

    segments: list[PowerLawFitModel]
    breakpoints: list[int]
    total_sse: float

    @classmethod
    def from_fit(cls, fit: SegmentedFit) -> SegmentedFitModel:
        return cls(
            segments=[PowerLawFitModel.from_fit(segment.fit) for segment in fit.segments],
            breakpoints=fit.breakpoints,
            total_sse=fit.total_sse,
        )


class LengthBinModel(BaseModel):
    length: int
    observed: float
    expected: float
    standard_error: float
    z_score: float | None

    @classmethod
    def from_check(cls, check: LengthBinCheck) -> LengthBinModel:
        return cls(
            length=check.length,
            observed=check.observed,
            expected=check.expected,
            standard_error=check.standard_error,
            z_score=finite(check.z_score),
        )


class MonkeyContrast(BaseModel):
    """Bending of an equal-size random-text corpus next to the real one."""

    seed: int
    tokens: int
    bending_score: float
    fit: PowerLawFitModel


class ZipfCorpusReport(BaseModel):
    """Zipf study of one corpus."""

    label: str
    total_tokens: int
    vocabulary_size: int
    fitted_ranks: int
    fit: PowerLawFitModel
    segmented: SegmentedFitModel
    bending_score: float
    monkey: MonkeyContrast | None = None


class ZipfSummary(BaseModel):
    """Cross-corpus spread of upper-regime exponents and first breakpoints."""

    corpora: int
    mean_upper_exponent: float
    sd_upper_exponent: float
    median_breakpoint: float | None


class ZipfReport(BaseModel):
    corpora: list[ZipfCorpusReport]
    summary: ZipfSummary


class IntervalSummaryModel(BaseModel):
    interval: int
    pairs: int
    mean_cosine: float
    mean_spearman: float | None

    @classmethod
    def from_summary(cls, summary: IntervalSummary) -> IntervalSummaryModel:
        return cls(
            interval=summary.interval,
            pairs=summary.pairs,
            mean_cosine=summary.mean_cosine,
            mean_spearman=finite(summary.mean_spearman),
        )


class DriftReport(BaseModel):
    """Diachronic drift of one year-binned corpus."""

    language: str
    kernel_size: int
    years: list[int]
    intervals: list[IntervalSummaryModel]
    points: int
    index_correlation: float | None
    interval_trend: float | None
    cross_language: str | None = None
    cross_years: int = 0
    cross_mean_cosine: float | None = None


class AnosimReport(BaseModel):
    """ANOSIM outcome of a style run."""

    R: float
    p_value: float
    n_permutations: int
    seed: int
    exact: bool
    null_mean: float | None
    null_sd: float | None
    null_max: float | None
    metric: str
    frequency_mode: str
    kernel_size: int
    works: int
    group_sizes: dict[str, int]
    excluded_works: list[str] = Field(default_factory=list)

    @classmethod
    def from_result(
        cls,
        result: AnosimResult,
        metric: str,
        frequency_mode: str,
        kernel_size: int,
        works: int,
        excluded_works: list[str],
    ) -> AnosimReport:
        null = result.null_distribution_summary
        return cls(
            R=result.R,
            p_value=result.p_value,
            n_permutations=result.n_permutations,
            seed=result.seed,
            exact=result.exact,
            null_mean=finite(null.mean),
            null_sd=finite(null.sd),
            null_max=finite(null.max),
            metric=metric,
            frequency_mode=frequency_mode,
            kernel_size=kernel_size,
            works=works,
            group_sizes=result.group_sizes,
            excluded_works=excluded_works,
        )


class MonkeyReport(BaseModel):
    """Random-text corpus statistics against the closed-form length law."""

    alphabet_size: int
    space_probability: float
    seed: int
    tokens: int
    vocabulary_size: int
    fit: PowerLawFitModel
    segmented: SegmentedFitModel
    bending_score: float
    length_checks: list[LengthBinModel]
    max_abs_z: float | None


class ManifestEntry(BaseModel):
    """An output file and its content hash."""

    path: str
    hash: str
    size: int


class Manifest(BaseModel):
    """Every file of a report directory except the manifest itself.

    Carries no timestamps so identical runs produce identical manifests.
    """

    version: int = MANIFEST_VERSION
    subcommand: str
    tool_version: str
    entries: list[ManifestEntry]

    def hashes(self) -> dict[str, str]:
        return {entry.path: entry.hash for entry in self.entries}

