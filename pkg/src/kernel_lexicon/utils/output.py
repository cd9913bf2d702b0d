"""Output formatting for CLI results."""

from __future__ import annotations

import json
import math
import sys
from dataclasses import asdict, dataclass, field
from typing import Any


@dataclass
class RunResult:
    """Result of one analysis subcommand."""

    subcommand: str
    success: bool
    out_dir: str
    outputs: list[str] = field(default_factory=list)
    summary: dict[str, Any] = field(default_factory=dict)
    duration_seconds: float = 0.0
    error: str | None = None


@dataclass
class ConfigResult:
    """Result of ``config show`` or ``config validate``."""

    config_path: str
    config_valid: bool
    config_errors: list[str]
    config: dict[str, Any] = field(default_factory=dict)


def _jsonable(value: Any) -> Any:
    """Replace non-finite floats with None so output stays strict JSON."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {key: _jsonable(item) for key, item in value.items()}
    if isinstance(value, list | tuple):
        return [_jsonable(item) for item in value]
    return value


class OutputFormatter:
    """Format and output results to stdout.

    Data goes to stdout; failures go to stderr.
    """

    def __init__(self, json_mode: bool = False) -> None:
        self.json_mode = json_mode

    def output(self, result: RunResult | ConfigResult) -> None:
        """Output the result in the configured format."""
        if self.json_mode:
            self._output_json(result)
        else:
            self._output_human(result)

    def _output_json(self, result: RunResult | ConfigResult) -> None:
        """Output result as JSON to stdout."""
        json.dump(_jsonable(asdict(result)), sys.stdout, indent=2, default=str)
        print()

    def _output_human(self, result: RunResult | ConfigResult) -> None:
        """Output result in human-readable format."""
        if isinstance(result, RunResult):
            self._output_run_human(result)
        else:
            self._output_config_human(result)

    def _output_run_human(self, result: RunResult) -> None:
        if not result.success:
            print(f"{result.subcommand} failed: {result.error}", file=sys.stderr)
            return

        print(
            f"{result.subcommand} complete: {len(result.outputs)} files written to "
            f"{result.out_dir} ({result.duration_seconds:.1f}s)"
        )
        for key, value in result.summary.items():
            if isinstance(value, float):
                print(f"  {key}: {value:.6g}")
            else:
                print(f"  {key}: {value}")

    def _output_config_human(self, result: ConfigResult) -> None:
        print(f"Configuration: {result.config_path}")
        if result.config_valid:
            print("  Status: valid")
        else:
            print("  Status: INVALID", file=sys.stderr)
            for error in result.config_errors:
                print(f"    - {error}", file=sys.stderr)

        for section, values in result.config.items():
            print()
            print(f"[{section}]")
            for key, value in values.items():
                print(f"  {key} = {value}")


class ExitCode:
    """Process exit codes, one per error family."""

    SUCCESS = 0
    CONFIGURATION_ERROR = 2
    INPUT_ERROR = 3
    ANALYSIS_ERROR = 4
    INTERNAL_ERROR = 5
