"""Tests for CLI output formatting."""

import json
import math

import pytest

from kernel_lexicon.utils.output import ConfigResult, ExitCode, OutputFormatter, RunResult


def run_result(**overrides) -> RunResult:
    values = {
        "subcommand": "zipf",
        "success": True,
        "out_dir": "reports",
        "outputs": ["report.json", "manifest.json"],
        "summary": {"corpora": 2, "mean_upper_exponent": -1.0123456},
        "duration_seconds": 3.5,
    }
    values.update(overrides)
    return RunResult(**values)


class TestOutputFormatter:
    """Tests for OutputFormatter class."""

    def test_json_mode_outputs_json(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Should print the result as one JSON document on stdout."""
        OutputFormatter(json_mode=True).output(run_result())

        data = json.loads(capsys.readouterr().out)
        assert data["subcommand"] == "zipf"
        assert data["success"] is True
        assert data["outputs"] == ["report.json", "manifest.json"]
        assert data["summary"]["corpora"] == 2

    def test_json_mode_writes_null_for_nan(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Should keep the JSON strict when a summary value is NaN."""
        OutputFormatter(json_mode=True).output(run_result(summary={"index": math.nan}))

        out = capsys.readouterr().out
        assert "NaN" not in out
        assert json.loads(out)["summary"]["index"] is None

    def test_human_mode_outputs_text(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Should summarize files written and key values."""
        OutputFormatter(json_mode=False).output(run_result())

        out = capsys.readouterr().out
        assert "zipf complete: 2 files written to reports (3.5s)" in out
        assert "mean_upper_exponent: -1.01235" in out

    def test_human_mode_shows_errors(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Should send failures to stderr."""
        OutputFormatter().output(run_result(success=False, error="bad manifest"))

        captured = capsys.readouterr()
        assert captured.out == ""
        assert "zipf failed: bad manifest" in captured.err

    def test_config_result_human(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Should list sections and validation errors."""
        result = ConfigResult(
            config_path="config.toml",
            config_valid=False,
            config_errors=["run.threads must be >= 1, got 0"],
            config={"run": {"threads": 0}},
        )

        OutputFormatter().output(result)

        captured = capsys.readouterr()
        assert "[run]" in captured.out
        assert "threads = 0" in captured.out
        assert "INVALID" in captured.err
        assert "run.threads must be >= 1" in captured.err


class TestExitCode:
    """Tests for ExitCode constants."""

    def test_success_is_zero(self) -> None:
        """Success should be exit code 0."""
        assert ExitCode.SUCCESS == 0

    def test_codes_are_distinct(self) -> None:
        """Each error family should have its own code."""
        codes = [
            ExitCode.CONFIGURATION_ERROR,
            ExitCode.INPUT_ERROR,
            ExitCode.ANALYSIS_ERROR,
            ExitCode.INTERNAL_ERROR,
        ]

        assert codes == [2, 3, 4, 5]
