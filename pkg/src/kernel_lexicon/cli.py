"""Command-line interface for kernel-lexicon."""

from __future__ import annotations

import sys
from collections.abc import Callable
from pathlib import Path
from typing import TYPE_CHECKING, Any, TypeVar

import click

from kernel_lexicon import __version__
from kernel_lexicon.config import DEFAULT_CONFIG_PATH, ConfigurationError, load_config
from kernel_lexicon.errors import KernelLexiconError
from kernel_lexicon.utils.logging import get_logger, setup_logging
from kernel_lexicon.utils.output import ConfigResult, ExitCode, OutputFormatter, RunResult

if TYPE_CHECKING:
    from kernel_lexicon.config import Config
    from kernel_lexicon.reports.runner import InputSpec, RunConfig

logger = get_logger(__name__)

F = TypeVar("F", bound=Callable[..., Any])

FORMATS = ("text", "leipzig", "google1gram")


class Context:
    """CLI context holding shared state."""

    def __init__(self) -> None:
        self.config: Config | None = None
        self.config_path: Path = DEFAULT_CONFIG_PATH
        self.json_mode: bool = False
        self.verbose: int = 0
        self.formatter: OutputFormatter | None = None


pass_context = click.make_pass_decorator(Context, ensure=True)


def _int_list(ctx: click.Context, param: click.Parameter, value: str | None) -> list[int] | None:
    """Parse a comma-separated list of integers."""
    if value is None:
        return None
    try:
        return [int(part) for part in value.split(",") if part.strip()]
    except ValueError as e:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}") from e


def _run_options(function: F) -> F:
    """Options every analysis subcommand shares."""
    options = [
        click.option(
            "--input",
            "-i",
            "inputs",
            multiple=True,
            type=click.Path(path_type=Path),
            help="Corpus file (repeatable); gzip is detected automatically",
        ),
        click.option(
            "--format",
            "input_format",
            type=click.Choice(FORMATS),
            default="text",
            show_default=True,
            help="Input record format",
        ),
        click.option(
            "--seed",
            type=int,
            default=None,
            help="Random seed (default from config)",
        ),
        click.option(
            "--threads",
            type=click.IntRange(min=1),
            default=None,
            help="Worker threads; results do not depend on it",
        ),
        click.option(
            "--out",
            "-o",
            type=click.Path(path_type=Path),
            default=None,
            help="Report directory (default from config)",
        ),
    ]
    for option in reversed(options):
        function = option(function)
    return function


def _apply_common(
    config: Config,
    seed: int | None,
    threads: int | None,
    out: Path | None,
) -> None:
    """Apply command-line overrides, which beat file and environment values."""
    if seed is not None:
        config.analysis.seed = seed
    if threads is not None:
        config.run.threads = threads
    if out is not None:
        config.run.out = out


def _input_specs(inputs: tuple[Path, ...], input_format: str) -> list[InputSpec]:
    from kernel_lexicon.reports.runner import InputFormat, InputSpec

    return [InputSpec(path=path, format=InputFormat(input_format)) for path in inputs]


def _execute(ctx: Context, build: Callable[[], RunConfig]) -> None:
    """Run a subcommand and map failures to exit codes."""
    from kernel_lexicon.reports.runner import run

    assert ctx.formatter is not None
    try:
        run_config = build()
        result = run(run_config)
    except KernelLexiconError as e:
        logger.error("%s", e)
        ctx.formatter.output(
            RunResult(
                subcommand=click.get_current_context().info_name or "",
                success=False,
                out_dir="",
                error=str(e),
            )
        )
        sys.exit(e.exit_code)
    except Exception as e:
        logger.exception("Unexpected failure: %s", e)
        sys.exit(ExitCode.INTERNAL_ERROR)

    ctx.formatter.output(result)


@click.group()
@click.option(
    "--config",
    "-c",
    "config_path",
    type=click.Path(exists=False, path_type=Path),
    default=None,
    help="Path to config file (default: ./config.toml)",
)
@click.option(
    "--json",
    "json_mode",
    is_flag=True,
    default=False,
    help="Output in JSON format",
)
@click.option(
    "--verbose",
    "-v",
    count=True,
    help="Increase verbosity (can repeat: -vv)",
)
@click.option(
    "--quiet",
    "-q",
    is_flag=True,
    default=False,
    help="Suppress non-error output",
)
@click.version_option(version=__version__, prog_name="kernel-lexicon")
@pass_context
def main(
    ctx: Context,
    config_path: Path | None,
    json_mode: bool,
    verbose: int,
    quiet: bool,
) -> None:
    """kernel-lexicon - Word-frequency statistics for corpora.

    Counts words, fits Zipf regimes, measures kernel-lexicon drift across
    years and tests author style separation with ANOSIM.
    """
    ctx.json_mode = json_mode
    ctx.verbose = verbose
    ctx.formatter = OutputFormatter(json_mode=json_mode)

    # Logs go to stderr; reports go to files and stdout
    setup_logging(verbose=verbose, quiet=quiet, json_format=json_mode)

    if config_path is not None:
        ctx.config_path = config_path
    try:
        ctx.config = load_config(ctx.config_path)
    except (ConfigurationError, OSError) as e:
        click.echo(f"Error loading configuration: {e}", err=True)
        sys.exit(ExitCode.CONFIGURATION_ERROR)


@main.command()
@_run_options
@click.option(
    "--gutenberg/--no-gutenberg",
    default=False,
    help="Strip Project Gutenberg header and license from text inputs",
)
@pass_context
def freq(
    ctx: Context,
    inputs: tuple[Path, ...],
    input_format: str,
    seed: int | None,
    threads: int | None,
    out: Path | None,
    gutenberg: bool,
) -> None:
    """Count words in one or more corpora and merge the counts.

    Examples:

        kernel-lexicon freq -i novel.txt -o reports/novel

        kernel-lexicon freq --format leipzig -i eng_news_2020_1M-sentences.txt
    """
    assert ctx.config is not None
    config = ctx.config

    def build() -> RunConfig:
        from kernel_lexicon.reports.runner import RunConfig, Subcommand

        _apply_common(config, seed, threads, out)
        return RunConfig(
            subcommand=Subcommand.FREQ,
            inputs=_input_specs(inputs, input_format),
            config=config,
            gutenberg=gutenberg,
        )

    _execute(ctx, build)


@main.command()
@_run_options
@click.option("--segments", type=click.IntRange(1, 3), default=None, help="Power-law segments")
@click.option(
    "--grid",
    callback=_int_list,
    default=None,
    help="Comma-separated candidate breakpoint ranks (default: log-spaced grid)",
)
@click.option("--min-count", type=click.IntRange(min=1), default=None, help="Drop rarer ranks")
@click.option(
    "--curve-points",
    type=click.IntRange(min=0),
    default=None,
    help="Log-spaced ranks kept for fitting (0: every rank)",
)
@click.option(
    "--compare-monkey",
    is_flag=True,
    default=False,
    help="Also fit an equal-size random-text corpus",
)
@click.option("--gutenberg/--no-gutenberg", default=False, help="Strip Gutenberg boilerplate")
@pass_context
def zipf(
    ctx: Context,
    inputs: tuple[Path, ...],
    input_format: str,
    seed: int | None,
    threads: int | None,
    out: Path | None,
    segments: int | None,
    grid: list[int] | None,
    min_count: int | None,
    curve_points: int | None,
    compare_monkey: bool,
    gutenberg: bool,
) -> None:
    """Fit power laws to the rank-frequency curve of each corpus.

    Every --input is studied separately; the report adds a cross-corpus
    summary of exponents and breakpoints.

    Examples:

        kernel-lexicon zipf -i english.txt --segments 2

        kernel-lexicon zipf -i eng.txt -i deu.txt --compare-monkey
    """
    assert ctx.config is not None
    config = ctx.config

    def build() -> RunConfig:
        from kernel_lexicon.reports.runner import RunConfig, Subcommand

        _apply_common(config, seed, threads, out)
        if segments is not None:
            config.analysis.segments = segments
        if min_count is not None:
            config.analysis.min_count = min_count
        if curve_points is not None:
            config.analysis.curve_points = curve_points
        return RunConfig(
            subcommand=Subcommand.ZIPF,
            inputs=_input_specs(inputs, input_format),
            config=config,
            grid=grid,
            compare_monkey=compare_monkey,
            gutenberg=gutenberg,
        )

    _execute(ctx, build)


@main.command()
@_run_options
@click.option("--kernel-size", "-k", type=int, default=None, help="Kernel lexicon size K")
@click.option(
    "--intervals",
    callback=_int_list,
    default=None,
    help="Comma-separated year intervals (default: 1,2,4,8,16,32,64)",
)
@click.option(
    "--cross",
    type=click.Path(path_type=Path),
    default=None,
    help="Second variety (1-gram file) compared year by year",
)
@click.option("--bin-width", type=click.IntRange(min=1), default=1, help="Years per bin")
@click.option("--year-min", type=int, default=None, help="First year kept")
@click.option("--year-max", type=int, default=None, help="Last year kept")
@click.option("--span", type=int, default=None, help="Moving-average span (odd)")
@pass_context
def drift(
    ctx: Context,
    inputs: tuple[Path, ...],
    input_format: str,
    seed: int | None,
    threads: int | None,
    out: Path | None,
    kernel_size: int | None,
    intervals: list[int] | None,
    cross: Path | None,
    bin_width: int,
    year_min: int | None,
    year_max: int | None,
    span: int | None,
) -> None:
    """Measure kernel-lexicon drift across years of a 1-gram corpus.

    Examples:

        kernel-lexicon drift --format google1gram -i eng-1gram.tsv.gz

        kernel-lexicon drift --format google1gram -i eng-gb.tsv --cross eng-us.tsv
    """
    assert ctx.config is not None
    config = ctx.config

    def build() -> RunConfig:
        from kernel_lexicon.reports.runner import InputFormat, InputSpec, RunConfig, Subcommand

        _apply_common(config, seed, threads, out)
        if kernel_size is not None:
            config.analysis.kernel_size = kernel_size
        if intervals is not None:
            config.analysis.intervals = intervals
        if year_min is not None:
            config.google1gram.year_min = year_min
        if year_max is not None:
            config.google1gram.year_max = year_max
        if span is not None:
            config.analysis.smoothing_span = span
        return RunConfig(
            subcommand=Subcommand.DRIFT,
            inputs=_input_specs(inputs, input_format),
            config=config,
            cross=(
                InputSpec(path=cross, format=InputFormat(input_format))
                if cross is not None
                else None
            ),
            bin_width=bin_width,
        )

    _execute(ctx, build)


@main.command()
@_run_options
@click.option("--kernel-size", "-k", type=int, default=None, help="Kernel lexicon size K")
@click.option(
    "--metric",
    type=click.Choice(["one_minus_pearson", "euclidean"]),
    default=None,
    help="Dissimilarity between deviation vectors",
)
@click.option("--permutations", type=int, default=None, help="ANOSIM permutations (>= 99)")
@click.option("--min-tokens", type=click.IntRange(min=0), default=None, help="Shortest work kept")
@click.option(
    "--frequency-mode",
    type=click.Choice(["relative", "raw"]),
    default=None,
    help="Relative frequencies or raw counts in deviation vectors",
)
@click.option(
    "--gutenberg/--no-gutenberg",
    default=True,
    help="Strip Gutenberg boilerplate from works (default: on)",
)
@pass_context
def style(
    ctx: Context,
    inputs: tuple[Path, ...],
    input_format: str,
    seed: int | None,
    threads: int | None,
    out: Path | None,
    kernel_size: int | None,
    metric: str | None,
    permutations: int | None,
    min_tokens: int | None,
    frequency_mode: str | None,
    gutenberg: bool,
) -> None:
    """Test whether authors differ more than their own works do.

    --input is a manifest with one ``author_id<TAB>work_id<TAB>path`` line
    per work; --format applies to the works it lists.

    Examples:

        kernel-lexicon style -i authors.tsv --permutations 999 --seed 7
    """
    assert ctx.config is not None
    config = ctx.config

    def build() -> RunConfig:
        from kernel_lexicon.reports.runner import RunConfig, Subcommand

        _apply_common(config, seed, threads, out)
        if kernel_size is not None:
            config.analysis.kernel_size = kernel_size
        if metric is not None:
            config.analysis.metric = metric
        if permutations is not None:
            config.analysis.permutations = permutations
        if min_tokens is not None:
            config.analysis.min_work_tokens = min_tokens
        if frequency_mode is not None:
            config.analysis.frequency_mode = frequency_mode
        return RunConfig(
            subcommand=Subcommand.STYLE,
            inputs=_input_specs(inputs, input_format),
            config=config,
            gutenberg=gutenberg,
        )

    _execute(ctx, build)


@main.command()
@click.option("--alphabet-size", type=int, default=26, show_default=True, help="Letters")
@click.option(
    "--space-probability",
    type=float,
    default=0.18,
    show_default=True,
    help="Probability that a character is a space",
)
@click.option("--tokens", type=int, default=1_000_000, show_default=True, help="Words to emit")
@click.option("--seed", type=int, default=None, help="Random seed (default from config)")
@click.option("--segments", type=click.IntRange(1, 3), default=None, help="Power-law segments")
@click.option("--grid", callback=_int_list, default=None, help="Candidate breakpoint ranks")
@click.option("--write-text", is_flag=True, default=False, help="Also write corpus.txt")
@click.option("--threads", type=click.IntRange(min=1), default=None, help="Worker threads")
@click.option("--out", "-o", type=click.Path(path_type=Path), default=None, help="Report directory")
@pass_context
def monkey(
    ctx: Context,
    alphabet_size: int,
    space_probability: float,
    tokens: int,
    seed: int | None,
    segments: int | None,
    grid: list[int] | None,
    write_text: bool,
    threads: int | None,
    out: Path | None,
) -> None:
    """Generate random "monkey typing" text and analyze it.

    Examples:

        kernel-lexicon monkey --tokens 1000000 --seed 1

        kernel-lexicon monkey --alphabet-size 5 --space-probability 0.2 --write-text
    """
    assert ctx.config is not None
    config = ctx.config

    def build() -> RunConfig:
        from kernel_lexicon.ingest.monkey import MonkeyConfig
        from kernel_lexicon.reports.runner import RunConfig, Subcommand

        _apply_common(config, seed, threads, out)
        if segments is not None:
            config.analysis.segments = segments
        return RunConfig(
            subcommand=Subcommand.MONKEY,
            config=config,
            grid=grid,
            monkey=MonkeyConfig(
                alphabet_size=alphabet_size,
                space_probability=space_probability,
                target_tokens=tokens,
                seed=config.analysis.seed,
            ),
            write_text=write_text,
        )

    _execute(ctx, build)


@main.group(name="config")
def config_group() -> None:
    """Inspect the effective configuration."""


def _config_result(ctx: Context) -> ConfigResult:
    assert ctx.config is not None
    errors = ctx.config.validate()
    return ConfigResult(
        config_path=str(ctx.config_path),
        config_valid=not errors,
        config_errors=errors,
        config=ctx.config.to_dict(),
    )


@config_group.command()
@pass_context
def show(ctx: Context) -> None:
    """Print the merged configuration (file, environment, defaults).

    Examples:

        kernel-lexicon config show

        kernel-lexicon --json config show
    """
    assert ctx.formatter is not None
    ctx.formatter.output(_config_result(ctx))


@config_group.command()
@pass_context
def validate(ctx: Context) -> None:
    """Check the configuration and exit 2 if it is invalid."""
    assert ctx.formatter is not None
    result = _config_result(ctx)
    ctx.formatter.output(result)
    if not result.config_valid:
        sys.exit(ExitCode.CONFIGURATION_ERROR)


if __name__ == "__main__":
    main()
