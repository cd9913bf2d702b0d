"""Configuration loading and validation."""

from __future__ import annotations

import os
import tomllib
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from kernel_lexicon.analysis.drift import DEFAULT_INTERVALS, DEFAULT_SPAN
from kernel_lexicon.analysis.stylometry import (
    DEFAULT_MIN_WORK_TOKENS,
    DEFAULT_PERMUTATIONS,
    MIN_PERMUTATIONS,
    DissimilarityMetric,
    FrequencyMode,
)
from kernel_lexicon.analysis.zipf import (
    DEFAULT_CURVE_POINTS,
    DEFAULT_GRID_MIN_RANK,
    DEFAULT_GRID_POINTS,
    DEFAULT_MIN_COUNT,
    MIN_SEGMENT_POINTS,
)
from kernel_lexicon.errors import KernelLexiconError
from kernel_lexicon.frequency.table import DEFAULT_KERNEL_SIZE
from kernel_lexicon.ingest.readers import GoogleColumnMap
from kernel_lexicon.ingest.tokenize import TokenPolicy, WordBoundaryRule
from kernel_lexicon.utils.logging import get_logger

logger = get_logger(__name__)

DEFAULT_CONFIG_PATH = Path("./config.toml")

_TOML_TYPES: dict[str, tuple[type, ...]] = {
    "bool": (bool,),
    "int": (int,),
    "int | None": (int,),
    "str": (str,),
    "list[int]": (list,),
    "Path": (Path,),
}


class ConfigurationError(KernelLexiconError):
    """Raised when configuration is invalid."""

    exit_code = 2


@dataclass
class TokensConfig:
    """Tokenization policy settings."""

    lowercase_fold: bool = True
    drop_numeric: bool = True
    drop_punctuation: bool = True
    min_token_length: int = 1
    word_boundary_rule: str = WordBoundaryRule.UNICODE_WORDS.value
    join_internal_punctuation: bool = True

    def to_policy(self) -> TokenPolicy:
        """Build the TokenPolicy these settings describe."""
        return TokenPolicy(
            lowercase_fold=self.lowercase_fold,
            drop_numeric=self.drop_numeric,
            drop_punctuation=self.drop_punctuation,
            min_token_length=self.min_token_length,
            word_boundary_rule=WordBoundaryRule(self.word_boundary_rule),
            join_internal_punctuation=self.join_internal_punctuation,
        )


@dataclass
class LeipzigConfig:
    """Leipzig sentence-file layout."""

    text_column: int = 1
    delimiter: str = "\t"


@dataclass
class Google1GramConfig:
    """Google Books 1-gram layout and year filter."""

    word_column: int = 0
    year_column: int = 1
    count_column: int = 2
    year_min: int | None = None
    year_max: int | None = None
    strict: bool = False

    def column_map(self) -> GoogleColumnMap:
        return GoogleColumnMap(
            word=self.word_column, year=self.year_column, count=self.count_column
        )

    def year_filter(self) -> tuple[int, int] | None:
        """Inclusive year range, or None when unbounded on both sides."""
        if self.year_min is None and self.year_max is None:
            return None
        low = self.year_min if self.year_min is not None else -(2**31)
        high = self.year_max if self.year_max is not None else 2**31
        return low, high


@dataclass
class AnalysisConfig:
    """Parameters shared by the analyses."""

    kernel_size: int = DEFAULT_KERNEL_SIZE
    intervals: list[int] = field(default_factory=lambda: list(DEFAULT_INTERVALS))
    segments: int = 2
    grid_points: int = DEFAULT_GRID_POINTS
    grid_min_rank: int = DEFAULT_GRID_MIN_RANK
    min_count: int = DEFAULT_MIN_COUNT
    # 0 fits every rank
    curve_points: int = DEFAULT_CURVE_POINTS
    metric: str = DissimilarityMetric.ONE_MINUS_PEARSON.value
    permutations: int = DEFAULT_PERMUTATIONS
    seed: int = 0
    min_work_tokens: int = DEFAULT_MIN_WORK_TOKENS
    smoothing_span: int = DEFAULT_SPAN
    frequency_mode: str = FrequencyMode.RELATIVE.value


@dataclass
class ExecutionConfig:
    """Settings that affect how a run executes but never its results."""

    threads: int = 1
    out: Path = field(default_factory=lambda: Path("./reports"))


@dataclass
class Config:
    """Main application configuration."""

    tokens: TokensConfig = field(default_factory=TokensConfig)
    leipzig: LeipzigConfig = field(default_factory=LeipzigConfig)
    google1gram: Google1GramConfig = field(default_factory=Google1GramConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    run: ExecutionConfig = field(default_factory=ExecutionConfig)

    def validate(self) -> list[str]:
        """Validate the configuration.

        Returns:
            List of validation error messages (empty if valid)
        """
        errors: list[str] = []
        tokens = self.tokens
        analysis = self.analysis

        if tokens.min_token_length < 1:
            errors.append(f"tokens.min_token_length must be >= 1, got {tokens.min_token_length}")
        if tokens.word_boundary_rule not in {rule.value for rule in WordBoundaryRule}:
            errors.append(f"Unknown tokens.word_boundary_rule: {tokens.word_boundary_rule}")

        if self.leipzig.text_column < 0:
            errors.append("leipzig.text_column must be >= 0")
        if len(self.leipzig.delimiter) != 1:
            errors.append("leipzig.delimiter must be a single character")

        google = self.google1gram
        columns = (google.word_column, google.year_column, google.count_column)
        if min(columns) < 0 or len(set(columns)) != 3:
            errors.append(f"google1gram columns must be distinct and >= 0, got {columns}")
        if (
            google.year_min is not None
            and google.year_max is not None
            and google.year_min > google.year_max
        ):
            errors.append("google1gram.year_min must not exceed year_max")

        if analysis.kernel_size < 1:
            errors.append(f"analysis.kernel_size must be >= 1, got {analysis.kernel_size}")
        if not analysis.intervals or min(analysis.intervals) < 1:
            errors.append("analysis.intervals must be a non-empty list of positive integers")
        if analysis.segments < 1:
            errors.append(f"analysis.segments must be >= 1, got {analysis.segments}")
        if analysis.grid_points < 1 or analysis.grid_min_rank < 1:
            errors.append("analysis.grid_points and grid_min_rank must be positive")
        if analysis.min_count < 1:
            errors.append(f"analysis.min_count must be >= 1, got {analysis.min_count}")
        if analysis.curve_points != 0 and analysis.curve_points < MIN_SEGMENT_POINTS:
            errors.append(
                f"analysis.curve_points must be 0 or >= {MIN_SEGMENT_POINTS}, "
                f"got {analysis.curve_points}"
            )
        if analysis.metric not in {metric.value for metric in DissimilarityMetric}:
            errors.append(f"Unknown analysis.metric: {analysis.metric}")
        if analysis.permutations < MIN_PERMUTATIONS:
            errors.append(
                f"analysis.permutations must be >= {MIN_PERMUTATIONS}, got {analysis.permutations}"
            )
        if not -(2**63) <= analysis.seed < 2**64:
            errors.append("analysis.seed must fit in 64 bits")
        if analysis.min_work_tokens < 0:
            errors.append("analysis.min_work_tokens must be >= 0")
        if analysis.smoothing_span < 1 or analysis.smoothing_span % 2 == 0:
            errors.append(
                f"analysis.smoothing_span must be an odd positive integer, "
                f"got {analysis.smoothing_span}"
            )
        if analysis.frequency_mode not in {mode.value for mode in FrequencyMode}:
            errors.append(f"Unknown analysis.frequency_mode: {analysis.frequency_mode}")

        if self.run.threads < 1:
            errors.append(f"run.threads must be >= 1, got {self.run.threads}")

        return errors

    def echo(self) -> dict[str, Any]:
        """Settings that determine results, for ``config.echo``.

        Thread count and output directory are left out so that the echo,
        and every hash derived from it, is the same for any execution budget.
        """
        return {
            "tokens": asdict(self.tokens),
            "leipzig": asdict(self.leipzig),
            "google1gram": asdict(self.google1gram),
            "analysis": asdict(self.analysis),
        }

    def to_dict(self) -> dict[str, Any]:
        """Full configuration including execution settings."""
        data = self.echo()
        data["run"] = {"threads": self.run.threads, "out": str(self.run.out)}
        return data


def _section(config_data: dict[str, Any], name: str) -> dict[str, Any]:
    value = config_data.get(name, {})
    if not isinstance(value, dict):
        raise ConfigurationError(f"[{name}] must be a table")
    return value


def _matches(value: Any, annotation: str) -> bool:
    expected = _TOML_TYPES.get(annotation)
    if expected is None:
        return True
    # TOML booleans are not integers
    if isinstance(value, bool) and bool not in expected:
        return False
    if annotation == "list[int]":
        return isinstance(value, list) and all(_matches(item, "int") for item in value)
    return isinstance(value, expected)


def _build(cls: type[Any], data: dict[str, Any], section: str) -> Any:
    fields = cls.__dataclass_fields__
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise ConfigurationError(f"Unknown key(s) in [{section}]: {', '.join(unknown)}")
    for name, value in data.items():
        annotation = str(fields[name].type)
        if not _matches(value, annotation):
            raise ConfigurationError(
                f"{section}.{name} must be {annotation}, got {type(value).__name__}"
            )
    return cls(**data)


def _env_int(name: str) -> int | None:
    value = os.environ.get(name)
    if not value:
        return None
    try:
        return int(value)
    except ValueError as e:
        raise ConfigurationError(f"{name} must be an integer, got {value!r}") from e


def load_config(config_path: Path | str | None = None) -> Config:
    """Load configuration from TOML file and environment variables.

    Priority (highest to lowest):
    1. Environment variables
    2. Config file values
    3. Default values

    Command-line flags are applied on top by the caller.

    Args:
        config_path: Path to TOML config file. If None, tries ./config.toml

    Returns:
        Loaded and merged configuration

    Raises:
        ConfigurationError: If the file is not valid TOML or has unknown keys
    """
    config_data: dict[str, Any] = {}

    if config_path is None:
        config_path = DEFAULT_CONFIG_PATH

    config_path = Path(config_path)
    if config_path.exists():
        logger.debug("Loading config from %s", config_path)
        try:
            with open(config_path, "rb") as f:
                config_data = tomllib.load(f)
        except tomllib.TOMLDecodeError as e:
            raise ConfigurationError(f"Invalid TOML in {config_path}: {e}") from e
    else:
        logger.debug("No config file found at %s, using defaults", config_path)

    unknown = sorted(set(config_data) - {"tokens", "leipzig", "google1gram", "analysis", "run"})
    if unknown:
        raise ConfigurationError(f"Unknown section(s): {', '.join(unknown)}")

    run_data = dict(_section(config_data, "run"))
    if isinstance(run_data.get("out"), str):
        run_data["out"] = Path(run_data["out"])

    try:
        config = Config(
            tokens=_build(TokensConfig, _section(config_data, "tokens"), "tokens"),
            leipzig=_build(LeipzigConfig, _section(config_data, "leipzig"), "leipzig"),
            google1gram=_build(
                Google1GramConfig, _section(config_data, "google1gram"), "google1gram"
            ),
            analysis=_build(AnalysisConfig, _section(config_data, "analysis"), "analysis"),
            run=_build(ExecutionConfig, run_data, "run"),
        )
    except TypeError as e:
        raise ConfigurationError(f"Invalid configuration: {e}") from e

    # Allow env var overrides for execution settings
    if (threads := _env_int("KERNEL_LEXICON_THREADS")) is not None:
        config.run.threads = threads

    if out := os.environ.get("KERNEL_LEXICON_OUT"):
        config.run.out = Path(out)

    return config
