"""Batch pipelines behind the CLI subcommands.

``run`` validates a RunConfig, executes one subcommand into a staging
directory and promotes it atomically to the configured output directory.
"""

from __future__ import annotations

import statistics
import time
from collections.abc import Callable, Iterator
from dataclasses import dataclass, field
from enum import StrEnum
from pathlib import Path
from typing import Any

import numpy as np

from kernel_lexicon.analysis.drift import (
    YearBinnedCorpus,
    cross_variety_series,
    drift_series,
    index_correlation,
    interval_summary,
    interval_trend,
    moving_average,
)
from kernel_lexicon.analysis.stylometry import (
    WorkSource,
    heatmap_rows,
    style_report,
)
from kernel_lexicon.analysis.zipf import (
    LengthWeighting,
    RankCurve,
    bending_score,
    default_grid,
    length_law_agreement,
    loglog_fit,
    plot_rows,
    segmented_fit,
    word_length_distribution,
)
from kernel_lexicon.config import AnalysisConfig, Config, ConfigurationError
from kernel_lexicon.errors import AnalysisError, ParameterError
from kernel_lexicon.frequency.table import (
    FrequencyTable,
    RankedDistribution,
    collapse_years,
    count,
    merge_all,
    parallel_map,
    rank,
)
from kernel_lexicon.ingest.monkey import MonkeyConfig, generate_monkey_text, geometric_length_law
from kernel_lexicon.ingest.readers import (
    ReadStats,
    YearedCount,
    open_source,
    read_google_1grams,
    read_leipzig_sentences,
    read_plain_text,
    read_work_manifest,
)
from kernel_lexicon.reports.models import (
    AnosimReport,
    DriftReport,
    FreqReport,
    IntervalSummaryModel,
    LengthBinModel,
    MonkeyContrast,
    MonkeyReport,
    PowerLawFitModel,
    SegmentedFitModel,
    SourceSummary,
    ZipfCorpusReport,
    ZipfReport,
    ZipfSummary,
    finite,
)
from kernel_lexicon.reports.writer import ReportWriter
from kernel_lexicon.utils.atomic import content_hash, staged_directory
from kernel_lexicon.utils.logging import get_logger
from kernel_lexicon.utils.output import RunResult

logger = get_logger(__name__)

# Longest word length checked against the geometric law
MAX_CHECKED_LENGTH = 10
MONKEY_TEXT_WORDS_PER_LINE = 20


class Subcommand(StrEnum):
    FREQ = "freq"
    ZIPF = "zipf"
    DRIFT = "drift"
    STYLE = "style"
    MONKEY = "monkey"


class InputFormat(StrEnum):
    TEXT = "text"
    LEIPZIG = "leipzig"
    GOOGLE1GRAM = "google1gram"


@dataclass(frozen=True)
class InputSpec:
    """A local corpus file and how to read it."""

    path: Path
    format: InputFormat = InputFormat.TEXT
    label: str = ""

    @property
    def name(self) -> str:
        """Label used in reports and file names; the file stem by default."""
        if self.label:
            return self.label
        stem = self.path.name
        for suffix in (".gz", ".tsv", ".txt"):
            stem = stem.removesuffix(suffix)
        return stem


@dataclass
class RunConfig:
    """Everything one batch run needs; echoed into its output directory."""

    subcommand: Subcommand
    inputs: list[InputSpec] = field(default_factory=list)
    config: Config = field(default_factory=Config)
    grid: list[int] | None = None
    compare_monkey: bool = False
    cross: InputSpec | None = None
    bin_width: int = 1
    gutenberg: bool | None = None
    monkey: MonkeyConfig = field(default_factory=MonkeyConfig)
    write_text: bool = False

    @property
    def strip_gutenberg(self) -> bool:
        """Boilerplate stripping is on by default only for style runs."""
        if self.gutenberg is None:
            return self.subcommand is Subcommand.STYLE
        return self.gutenberg

    def validate(self) -> list[str]:
        """Validate settings and inputs.

        Returns:
            List of validation error messages (empty if valid)
        """
        errors = self.config.validate()
        needs_input = self.subcommand is not Subcommand.MONKEY
        if needs_input and not self.inputs:
            errors.append(f"{self.subcommand} needs at least one --input")
        if self.subcommand in (Subcommand.DRIFT, Subcommand.STYLE) and len(self.inputs) > 1:
            errors.append(f"{self.subcommand} takes exactly one --input")
        for spec in [*self.inputs, *([self.cross] if self.cross else [])]:
            if not spec.path.is_file():
                errors.append(f"Input file not found: {spec.path}")
        if self.subcommand is Subcommand.DRIFT:
            for spec in [*self.inputs, *([self.cross] if self.cross else [])]:
                if spec.format is not InputFormat.GOOGLE1GRAM:
                    errors.append(f"drift needs google1gram input: {spec.path} is {spec.format}")
        if self.subcommand is Subcommand.STYLE and any(
            spec.format is InputFormat.GOOGLE1GRAM for spec in self.inputs
        ):
            errors.append("style works must be text or leipzig files")
        if self.bin_width < 1:
            errors.append(f"bin width must be >= 1, got {self.bin_width}")
        names = [spec.name for spec in self.inputs]
        if len(set(names)) != len(names):
            errors.append(f"Input labels must be unique, got {names}")
        return errors

    def echo(self) -> dict[str, Any]:
        """Result-determining settings, including input content hashes."""
        settings: dict[str, Any] = {
            "subcommand": self.subcommand.value,
            "inputs": [_describe(spec) for spec in self.inputs],
            **self.config.echo(),
        }
        if self.grid is not None:
            settings["grid"] = list(self.grid)
        if self.subcommand is Subcommand.ZIPF:
            settings["compare_monkey"] = self.compare_monkey
        if self.subcommand is Subcommand.DRIFT:
            settings["bin_width"] = self.bin_width
            settings["cross"] = _describe(self.cross) if self.cross else None
        if self.subcommand in (Subcommand.FREQ, Subcommand.ZIPF, Subcommand.STYLE):
            settings["strip_gutenberg"] = self.strip_gutenberg
        if self.subcommand is Subcommand.MONKEY:
            settings["monkey"] = {
                "alphabet_size": self.monkey.alphabet_size,
                "space_probability": self.monkey.space_probability,
                "target_tokens": self.monkey.target_tokens,
                "seed": self.monkey.seed,
                "write_text": self.write_text,
            }
        return settings


def _describe(spec: InputSpec) -> dict[str, str]:
    return {
        "path": spec.path.name,
        "format": spec.format.value,
        "label": spec.name,
        "hash": content_hash(spec.path),
    }


def _tokens(
    path: Path,
    input_format: InputFormat,
    config: Config,
    stats: ReadStats,
    gutenberg: bool,
) -> Iterator[str]:
    """Stream the tokens of a text or Leipzig file, closing it when exhausted."""
    policy = config.tokens.to_policy()
    with open_source(path) as source:
        if input_format is InputFormat.LEIPZIG:
            yield from read_leipzig_sentences(
                source,
                text_column=config.leipzig.text_column,
                delimiter=config.leipzig.delimiter,
                policy=policy,
                source_name=str(path),
                stats=stats,
            )
        else:
            yield from read_plain_text(
                source, policy=policy, source_name=str(path), gutenberg=gutenberg
            )


def _yeared_counts(spec: InputSpec, config: Config, stats: ReadStats) -> list[YearedCount]:
    google = config.google1gram
    with open_source(spec.path) as source:
        return list(
            read_google_1grams(
                source,
                column_map=google.column_map(),
                year_filter=google.year_filter(),
                policy=config.tokens.to_policy(),
                strict=google.strict,
                source_name=str(spec.path),
                stats=stats,
            )
        )


def count_input(
    spec: InputSpec, config: Config, gutenberg: bool = False
) -> tuple[FrequencyTable, ReadStats]:
    """Count one input of any format; 1-gram years are collapsed."""
    stats = ReadStats()
    started = time.monotonic()
    if spec.format is InputFormat.GOOGLE1GRAM:
        table = collapse_years(_yeared_counts(spec, config, stats))
    else:
        table = count(_tokens(spec.path, spec.format, config, stats, gutenberg))
    logger.info(
        "Counted %d tokens, %d words",
        table.total_tokens,
        table.vocabulary_size,
        extra={
            "source": str(spec.path),
            "duration_ms": round((time.monotonic() - started) * 1000),
        },
    )
    return table, stats


def _count_all(run_config: RunConfig) -> list[tuple[FrequencyTable, ReadStats]]:
    return parallel_map(
        lambda spec: count_input(spec, run_config.config, run_config.strip_gutenberg),
        run_config.inputs,
        run_config.config.run.threads,
    )


def _source_summaries(
    run_config: RunConfig, counted: list[tuple[FrequencyTable, ReadStats]]
) -> list[SourceSummary]:
    return [
        SourceSummary.from_stats(spec.path.name, spec.format.value, spec.name, stats)
        for spec, (_, stats) in zip(run_config.inputs, counted, strict=True)
    ]


def run_freq(run_config: RunConfig, writer: ReportWriter) -> dict[str, Any]:
    """Count and merge every input into one frequency table."""
    counted = _count_all(run_config)
    table = merge_all(table for table, _ in counted)
    writer.write_table("frequencies.tsv", table)
    writer.write_json(
        "report.json",
        FreqReport(
            total_tokens=table.total_tokens,
            vocabulary_size=table.vocabulary_size,
            sources=_source_summaries(run_config, counted),
        ),
    )
    return {"total_tokens": table.total_tokens, "vocabulary_size": table.vocabulary_size}


def _fit_curve(ranked: RankedDistribution, analysis: AnalysisConfig) -> RankCurve:
    return RankCurve.from_ranked(
        ranked,
        relative=True,
        min_count=analysis.min_count,
        points=analysis.curve_points or None,
    )


def _grid_for(run_config: RunConfig, curve: RankCurve) -> list[int]:
    if run_config.grid is not None:
        return run_config.grid
    analysis = run_config.config.analysis
    return default_grid(curve.max_rank, analysis.grid_points, analysis.grid_min_rank)


def _monkey_contrast(table: FrequencyTable, run_config: RunConfig) -> MonkeyContrast:
    analysis = run_config.config.analysis
    monkey = MonkeyConfig(
        alphabet_size=run_config.monkey.alphabet_size,
        space_probability=run_config.monkey.space_probability,
        target_tokens=table.total_tokens,
        seed=analysis.seed,
    )
    monkey_table = count(generate_monkey_text(monkey))
    curve = _fit_curve(rank(monkey_table), analysis)
    grid = default_grid(curve.max_rank, analysis.grid_points, analysis.grid_min_rank)
    return MonkeyContrast(
        seed=monkey.seed,
        tokens=monkey_table.total_tokens,
        bending_score=bending_score(curve, grid),
        fit=PowerLawFitModel.from_fit(loglog_fit(curve)),
    )


def run_zipf(run_config: RunConfig, writer: ReportWriter) -> dict[str, Any]:
    """Fit one and several power-law regimes to every input corpus."""
    analysis = run_config.config.analysis
    counted = _count_all(run_config)

    reports = []
    for spec, (table, _) in zip(run_config.inputs, counted, strict=True):
        ranked = rank(table)
        curve = _fit_curve(ranked, analysis)
        grid = _grid_for(run_config, curve)
        overall = loglog_fit(curve)
        segmented = segmented_fit(curve, analysis.segments, grid)
        score = bending_score(curve, grid)

        writer.write_tsv(
            f"rank_frequency_{spec.name}.tsv",
            ("segment", "rank", "frequency", "fitted"),
            plot_rows(curve, segmented),
        )
        reports.append(
            ZipfCorpusReport(
                label=spec.name,
                total_tokens=table.total_tokens,
                vocabulary_size=table.vocabulary_size,
                fitted_ranks=len(curve),
                fit=PowerLawFitModel.from_fit(overall),
                segmented=SegmentedFitModel.from_fit(segmented),
                bending_score=score,
                monkey=_monkey_contrast(table, run_config) if run_config.compare_monkey else None,
            )
        )
        logger.info(
            "Upper exponent %.4f, breakpoints %s, bending %.4f",
            segmented.segments[0].fit.exponent,
            segmented.breakpoints,
            score,
            extra={"source": str(spec.path)},
        )

    exponents = [report.segmented.segments[0].exponent for report in reports]
    breakpoints = [
        report.segmented.breakpoints[0] for report in reports if report.segmented.breakpoints
    ]
    summary = ZipfSummary(
        corpora=len(reports),
        mean_upper_exponent=float(np.mean(exponents)),
        sd_upper_exponent=float(np.std(exponents)),
        median_breakpoint=float(statistics.median(breakpoints)) if breakpoints else None,
    )
    writer.write_json("report.json", ZipfReport(corpora=reports, summary=summary))

    result: dict[str, Any] = {
        "corpora": len(reports),
        "mean_upper_exponent": summary.mean_upper_exponent,
    }
    if len(reports) == 1:
        result["exponent"] = reports[0].fit.exponent
        result["bending_score"] = reports[0].bending_score
    return result


def _year_corpus(spec: InputSpec, run_config: RunConfig) -> YearBinnedCorpus:
    stats = ReadStats()
    corpus = YearBinnedCorpus.from_records(
        _yeared_counts(spec, run_config.config, stats), language_tag=spec.name
    )
    if run_config.bin_width > 1:
        corpus = corpus.rebin(run_config.bin_width)
    logger.info(
        "Loaded %d year bins",
        len(corpus.years),
        extra={"source": str(spec.path), "language": spec.name},
    )
    return corpus


def _optional(compute: Callable[[], float], what: str, language: str) -> float | None:
    try:
        return compute()
    except (AnalysisError, ParameterError) as e:
        logger.warning("%s unavailable: %s", what, e, extra={"language": language})
        return None


def run_drift(run_config: RunConfig, writer: ReportWriter) -> dict[str, Any]:
    """Kernel similarity between year bins for every configured interval."""
    analysis = run_config.config.analysis
    threads = run_config.config.run.threads
    spec = run_config.inputs[0]
    corpus = _year_corpus(spec, run_config)

    series = drift_series(corpus, analysis.kernel_size, analysis.intervals, threads)
    writer.write_tsv(
        "drift_points.tsv",
        ("interval", "year_a", "year_b", "cosine", "spearman", "shared_words"),
        (
            (p.interval, p.year_a, p.year_b, p.cosine, p.spearman, p.shared_words)
            for p in series
        ),
    )

    curve_rows = []
    for interval in sorted({point.interval for point in series}):
        points = [point for point in series if point.interval == interval]
        cosine = moving_average([p.cosine for p in points], analysis.smoothing_span)
        rho = moving_average([p.spearman for p in points], analysis.smoothing_span)
        curve_rows.extend(
            (interval, p.year_a, p.cosine, c, p.spearman, r)
            for p, c, r in zip(points, cosine, rho, strict=True)
        )
    writer.write_tsv(
        "drift_curves.tsv",
        ("interval", "year", "cosine", "cosine_smoothed", "spearman", "spearman_smoothed"),
        curve_rows,
    )

    correlation = _optional(lambda: index_correlation(series), "Index correlation", spec.name)
    trend = _optional(lambda: interval_trend(series), "Interval trend", spec.name)
    report = DriftReport(
        language=spec.name,
        kernel_size=analysis.kernel_size,
        years=corpus.years,
        intervals=[IntervalSummaryModel.from_summary(s) for s in interval_summary(series)],
        points=len(series),
        index_correlation=correlation,
        interval_trend=trend,
    )

    if run_config.cross is not None:
        other = _year_corpus(run_config.cross, run_config)
        varieties = cross_variety_series(corpus, other, analysis.kernel_size, threads)
        smoothed = moving_average([p.cosine for p in varieties], analysis.smoothing_span)
        writer.write_tsv(
            "cross_variety.tsv",
            ("year", "cosine", "cosine_smoothed", "spearman", "shared_words"),
            (
                (p.year, p.cosine, s, p.spearman, p.shared_words)
                for p, s in zip(varieties, smoothed, strict=True)
            ),
        )
        report.cross_language = run_config.cross.name
        report.cross_years = len(varieties)
        report.cross_mean_cosine = float(np.mean([p.cosine for p in varieties]))

    writer.write_json("report.json", report)
    return {
        "points": len(series),
        "index_correlation": correlation,
        "interval_trend": trend,
    }


def run_style(run_config: RunConfig, writer: ReportWriter) -> dict[str, Any]:
    """ANOSIM over the works listed in a style manifest."""
    analysis = run_config.config.analysis
    spec = run_config.inputs[0]
    works = []
    for record in read_work_manifest(spec.path):
        if not record.path.is_file():
            raise ConfigurationError(
                f"Work '{record.work_id}' of '{record.author_id}' not found: {record.path}"
            )
        works.append(
            WorkSource(
                author_id=record.author_id,
                work_id=record.work_id,
                open_tokens=_work_opener(record.path, spec.format, run_config),
            )
        )

    outcome = style_report(
        works,
        K=analysis.kernel_size,
        metric=analysis.metric,
        n_permutations=analysis.permutations,
        seed=analysis.seed,
        min_work_tokens=analysis.min_work_tokens,
        mode=analysis.frequency_mode,
        threads=run_config.config.run.threads,
    )

    writer.write_tsv(
        "standard_profile.tsv",
        ("rank", "word", "f"),
        (
            (index, word, float(value))
            for index, (word, value) in enumerate(
                zip(outcome.profile.words, outcome.profile.f, strict=True), start=1
            )
        ),
    )
    writer.write_matrix("dissimilarity.tsv", outcome.matrix)
    writer.write_tsv(
        "heatmap.tsv",
        ("work_i", "author_i", "work_j", "author_j", "dissimilarity", "similarity"),
        heatmap_rows(outcome.matrix),
    )
    report = AnosimReport.from_result(
        outcome.result,
        metric=analysis.metric,
        frequency_mode=analysis.frequency_mode,
        kernel_size=outcome.profile.K,
        works=outcome.matrix.n,
        excluded_works=list(outcome.excluded_works),
    )
    writer.write_json("anosim.json", report)
    return {
        "R": report.R,
        "p_value": report.p_value,
        "works": report.works,
        "excluded_works": len(report.excluded_works),
    }


def _work_opener(
    path: Path, input_format: InputFormat, run_config: RunConfig
) -> Callable[[], Iterator[str]]:
    def open_tokens() -> Iterator[str]:
        return _tokens(
            path, input_format, run_config.config, ReadStats(), run_config.strip_gutenberg
        )

    return open_tokens


def run_monkey(run_config: RunConfig, writer: ReportWriter) -> dict[str, Any]:
    """Generate a random-text corpus and check it against the geometric length law."""
    analysis = run_config.config.analysis
    monkey = run_config.monkey
    words = list(generate_monkey_text(monkey))
    table = count(words)

    if run_config.write_text:
        lines = [
            " ".join(words[i : i + MONKEY_TEXT_WORDS_PER_LINE])
            for i in range(0, len(words), MONKEY_TEXT_WORDS_PER_LINE)
        ]
        writer.write_text("corpus.txt", "\n".join(lines) + "\n")

    curve = _fit_curve(rank(table), analysis)
    grid = _grid_for(run_config, curve)
    segmented = segmented_fit(curve, analysis.segments, grid)
    writer.write_table("frequencies.tsv", table)
    writer.write_tsv(
        "rank_frequency.tsv",
        ("segment", "rank", "frequency", "fitted"),
        plot_rows(curve, segmented),
    )

    histogram = word_length_distribution(table, LengthWeighting.BY_TOKEN)
    expected = geometric_length_law(monkey.space_probability, max(histogram.bins))
    checks = [
        check
        for check in length_law_agreement(histogram, expected)
        if check.length <= MAX_CHECKED_LENGTH
    ]
    writer.write_tsv(
        "word_lengths.tsv",
        ("length", "observed", "expected", "standard_error", "z_score"),
        ((c.length, c.observed, c.expected, c.standard_error, c.z_score) for c in checks),
    )

    z_scores = [abs(c.z_score) for c in checks]
    report = MonkeyReport(
        alphabet_size=monkey.alphabet_size,
        space_probability=monkey.space_probability,
        seed=monkey.seed,
        tokens=table.total_tokens,
        vocabulary_size=table.vocabulary_size,
        fit=PowerLawFitModel.from_fit(loglog_fit(curve)),
        segmented=SegmentedFitModel.from_fit(segmented),
        bending_score=bending_score(curve, grid),
        length_checks=[LengthBinModel.from_check(c) for c in checks],
        max_abs_z=finite(max(z_scores)) if z_scores else None,
    )
    writer.write_json("report.json", report)
    return {
        "tokens": report.tokens,
        "vocabulary_size": report.vocabulary_size,
        "bending_score": report.bending_score,
        "max_abs_z": report.max_abs_z,
    }


HANDLERS: dict[Subcommand, Callable[[RunConfig, ReportWriter], dict[str, Any]]] = {
    Subcommand.FREQ: run_freq,
    Subcommand.ZIPF: run_zipf,
    Subcommand.DRIFT: run_drift,
    Subcommand.STYLE: run_style,
    Subcommand.MONKEY: run_monkey,
}


def run(run_config: RunConfig) -> RunResult:
    """Execute one subcommand and promote its report directory atomically.

    Writes the subcommand's files plus ``config.echo`` and ``manifest.json``.
    Nothing reaches the output directory unless every step succeeds.

    Raises:
        ConfigurationError: If the run configuration is invalid
        KernelLexiconError: Subclasses raised by ingestion or analysis
    """
    errors = run_config.validate()
    if errors:
        raise ConfigurationError("; ".join(errors))

    started = time.monotonic()
    out_dir = run_config.config.run.out
    logger.info("Running %s into %s", run_config.subcommand, out_dir)

    with staged_directory(out_dir) as staging:
        writer = ReportWriter(staging)
        summary = HANDLERS[run_config.subcommand](run_config, writer)
        writer.write_echo(run_config.echo())
        manifest = writer.write_manifest(run_config.subcommand.value)

    return RunResult(
        subcommand=run_config.subcommand.value,
        success=True,
        out_dir=str(out_dir),
        outputs=[entry.path for entry in manifest.entries],
        summary=summary,
        duration_seconds=time.monotonic() - started,
    )
