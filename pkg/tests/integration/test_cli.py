"""End-to-end tests for the kernel-lexicon command line."""

import json
from collections.abc import Iterator
from pathlib import Path

import pytest
import yaml
from click.testing import CliRunner, Result

from kernel_lexicon.analysis.stylometry import WorkSource, style_report
from kernel_lexicon.cli import main
from kernel_lexicon.config import TokensConfig
from kernel_lexicon.ingest.readers import open_source, read_plain_text, read_work_manifest
from kernel_lexicon.reports.writer import read_manifest
from tests.factories import author_text, synthetic_drift_lines


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch: pytest.MonkeyPatch) -> None:
    """Keep local environment overrides out of CLI runs."""
    monkeypatch.delenv("KERNEL_LEXICON_THREADS", raising=False)
    monkeypatch.delenv("KERNEL_LEXICON_OUT", raising=False)


@pytest.fixture
def invoke(tmp_path: Path) -> Iterator:
    """Run the CLI against a config path that does not exist."""
    runner = CliRunner()
    no_config = tmp_path / "no-config.toml"

    def call(*args: str) -> Result:
        return runner.invoke(main, ["-c", str(no_config), *args])

    yield call


@pytest.fixture
def zipf_text(tmp_path: Path) -> Path:
    path = tmp_path / "english.txt"
    path.write_text(author_text(0, 0, n_tokens=20000), encoding="utf-8")
    return path


@pytest.fixture
def second_drift_file(tmp_path: Path) -> Path:
    path = tmp_path / "drift-us-1gram.tsv"
    path.write_text("\n".join(synthetic_drift_lines(seed=5)) + "\n", encoding="utf-8")
    return path


def load_json(path: Path) -> dict:
    return json.loads(path.read_text(encoding="utf-8"))


class TestFreq:
    """Tests for the freq subcommand."""

    def test_writes_frequency_table(self, invoke, sample_text_file: Path, tmp_path: Path) -> None:
        """Should write the merged table, report, echo and manifest."""
        out = tmp_path / "reports"

        result = invoke("freq", "-i", str(sample_text_file), "-o", str(out))

        assert result.exit_code == 0, result.output
        assert sorted(p.name for p in out.iterdir()) == [
            "config.echo",
            "frequencies.tsv",
            "manifest.json",
            "report.json",
        ]
        lines = (out / "frequencies.tsv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "#total_tokens\t23"
        assert "the\t5" in lines
        assert load_json(out / "report.json")["total_tokens"] == 23

    def test_json_summary_on_stdout(self, invoke, leipzig_file: Path, tmp_path: Path) -> None:
        """Should print a single JSON document with the run summary."""
        out = tmp_path / "reports"

        result = invoke(
            "--json", "freq", "--format", "leipzig", "-i", str(leipzig_file), "-o", str(out)
        )

        assert result.exit_code == 0
        data = json.loads(result.stdout)
        assert data["success"] is True
        assert data["subcommand"] == "freq"
        assert "frequencies.tsv" in data["outputs"]
        assert data["summary"]["vocabulary_size"] > 0

    def test_merges_inputs(self, invoke, sample_text_file: Path, tmp_path: Path) -> None:
        """Should add counts of every input and list each source."""
        out = tmp_path / "reports"
        other = tmp_path / "other.txt"
        other.write_text("The end\n", encoding="utf-8")

        result = invoke("freq", "-i", str(sample_text_file), "-i", str(other), "-o", str(out))

        assert result.exit_code == 0, result.output
        report = load_json(out / "report.json")
        assert report["total_tokens"] == 25
        assert [source["label"] for source in report["sources"]] == ["sample", "other"]
        assert "the\t6" in (out / "frequencies.tsv").read_text(encoding="utf-8").splitlines()

    def test_rejects_duplicate_labels(
        self, invoke, sample_text_file: Path, tmp_path: Path
    ) -> None:
        """Should exit 2 when two inputs share a label."""
        out = tmp_path / "reports"
        path = str(sample_text_file)

        result = invoke("freq", "-i", path, "-i", path, "-o", str(out))

        assert result.exit_code == 2
        assert not out.exists()

    def test_missing_input(self, invoke, tmp_path: Path) -> None:
        """Should exit 2 and leave no report directory."""
        out = tmp_path / "reports"

        result = invoke("freq", "-i", str(tmp_path / "absent.txt"), "-o", str(out))

        assert result.exit_code == 2
        assert not out.exists()

    def test_no_input(self, invoke, tmp_path: Path) -> None:
        """Should exit 2 when no corpus is given."""
        result = invoke("freq", "-o", str(tmp_path / "reports"))

        assert result.exit_code == 2

    def test_invalid_utf8(self, invoke, tmp_path: Path) -> None:
        """Should exit 3 on undecodable text."""
        path = tmp_path / "broken.txt"
        path.write_bytes(b"hello \xff world\n")

        result = invoke("freq", "-i", str(path), "-o", str(tmp_path / "reports"))

        assert result.exit_code == 3
        assert not (tmp_path / "reports").exists()

    def test_all_malformed_leipzig(self, invoke, tmp_path: Path) -> None:
        """Should exit 3 when no line has a text column."""
        path = tmp_path / "bad-sentences.txt"
        path.write_text("no tabs here\nnor here\n", encoding="utf-8")

        result = invoke("freq", "--format", "leipzig", "-i", str(path), "-o", str(tmp_path / "r"))

        assert result.exit_code == 3

    def test_failed_run_keeps_previous_report(
        self, invoke, sample_text_file: Path, tmp_path: Path
    ) -> None:
        """Should leave an earlier report untouched when a later run fails."""
        out = tmp_path / "reports"
        invoke("freq", "-i", str(sample_text_file), "-o", str(out))
        before = (out / "manifest.json").read_bytes()
        broken = tmp_path / "broken.txt"
        broken.write_bytes(b"\xff\xfe")

        result = invoke("freq", "-i", str(broken), "-o", str(out))

        assert result.exit_code == 3
        assert (out / "manifest.json").read_bytes() == before


class TestZipf:
    """Tests for the zipf subcommand."""

    def test_fits_corpus(self, invoke, zipf_text: Path, tmp_path: Path) -> None:
        """Should write the rank-frequency curve and the fitted regimes."""
        out = tmp_path / "reports"

        result = invoke("zipf", "-i", str(zipf_text), "-o", str(out), "--segments", "2")

        assert result.exit_code == 0, result.output
        assert (out / "rank_frequency_english.tsv").exists()
        report = load_json(out / "report.json")
        (corpus,) = report["corpora"]
        assert corpus["label"] == "english"
        assert corpus["total_tokens"] == 20000
        assert corpus["fit"]["exponent"] < 0
        assert 0.0 <= corpus["bending_score"] <= 1.0
        assert len(corpus["segmented"]["breakpoints"]) <= 1
        assert corpus["monkey"] is None
        assert report["summary"]["corpora"] == 1

    def test_compare_monkey(self, invoke, zipf_text: Path, tmp_path: Path) -> None:
        """Should add an equal-size random-text contrast."""
        out = tmp_path / "reports"

        result = invoke("zipf", "-i", str(zipf_text), "-o", str(out), "--compare-monkey")

        assert result.exit_code == 0, result.output
        (corpus,) = load_json(out / "report.json")["corpora"]
        assert corpus["monkey"]["tokens"] == 20000
        assert 0.0 <= corpus["monkey"]["bending_score"] <= 1.0

    def test_explicit_grid_is_echoed(self, invoke, zipf_text: Path, tmp_path: Path) -> None:
        """Should record the breakpoint grid in config.echo."""
        out = tmp_path / "reports"

        result = invoke("zipf", "-i", str(zipf_text), "-o", str(out), "--grid", "10,20,40")

        assert result.exit_code == 0, result.output
        echo = yaml.safe_load((out / "config.echo").read_text(encoding="utf-8"))
        assert echo["grid"] == [10, 20, 40]
        assert echo["subcommand"] == "zipf"
        assert "run" not in echo

    def test_vocabulary_too_small(
        self, invoke, sample_text_file: Path, tmp_path: Path
    ) -> None:
        """Should exit 4 when the vocabulary cannot hold a breakpoint grid."""
        out = tmp_path / "reports"

        result = invoke("zipf", "-i", str(sample_text_file), "-o", str(out))

        assert result.exit_code == 4
        assert not out.exists()

    def test_curve_points_echoed(self, invoke, zipf_text: Path, tmp_path: Path) -> None:
        """Should fit every rank with --curve-points 0 and record it."""
        out = tmp_path / "reports"

        result = invoke("zipf", "-i", str(zipf_text), "-o", str(out), "--curve-points", "0")

        assert result.exit_code == 0, result.output
        echo = yaml.safe_load((out / "config.echo").read_text(encoding="utf-8"))
        assert echo["analysis"]["curve_points"] == 0
        assert echo["analysis"]["min_count"] == 3

    def test_bad_grid(self, invoke, zipf_text: Path, tmp_path: Path) -> None:
        """Should reject a grid that is not a list of integers."""
        result = invoke("zipf", "-i", str(zipf_text), "-o", str(tmp_path / "r"), "--grid", "a,b")

        assert result.exit_code == 2


class TestDrift:
    """Tests for the drift subcommand."""

    def test_drift_series(self, invoke, drift_file: Path, tmp_path: Path) -> None:
        """Should write per-pair points, smoothed curves and the report."""
        out = tmp_path / "reports"

        result = invoke(
            "drift", "--format", "google1gram", "-i", str(drift_file), "-o", str(out),
            "-k", "100", "--intervals", "1,2,4",
        )

        assert result.exit_code == 0, result.output
        points = (out / "drift_points.tsv").read_text(encoding="utf-8").splitlines()
        assert points[0] == "interval\tyear_a\tyear_b\tcosine\tspearman\tshared_words"
        assert len(points) - 1 == 63 + 62 + 60
        report = load_json(out / "report.json")
        assert report["kernel_size"] == 100
        assert [s["interval"] for s in report["intervals"]] == [1, 2, 4]
        assert report["interval_trend"] < 0
        assert not (out / "cross_variety.tsv").exists()

    def test_cross_variety(
        self, invoke, drift_file: Path, second_drift_file: Path, tmp_path: Path
    ) -> None:
        """Should compare two varieties year by year."""
        out = tmp_path / "reports"

        result = invoke(
            "drift", "--format", "google1gram", "-i", str(drift_file), "-o", str(out),
            "-k", "100", "--intervals", "1", "--cross", str(second_drift_file),
        )

        assert result.exit_code == 0, result.output
        rows = (out / "cross_variety.tsv").read_text(encoding="utf-8").splitlines()
        assert len(rows) == 1 + 64
        report = load_json(out / "report.json")
        assert report["cross_language"] == "drift-us-1gram"
        assert report["cross_years"] == 64

    def test_requires_google_format(self, invoke, drift_file: Path, tmp_path: Path) -> None:
        """Should exit 2 for a text input."""
        result = invoke("drift", "-i", str(drift_file), "-o", str(tmp_path / "r"))

        assert result.exit_code == 2

    def test_independent_of_threads(self, invoke, drift_file: Path, tmp_path: Path) -> None:
        """Should produce byte-identical reports for any thread count."""
        for threads in ("1", "8"):
            result = invoke(
                "drift", "--format", "google1gram", "-i", str(drift_file),
                "-o", str(tmp_path / f"t{threads}"), "-k", "50", "--intervals", "1,8",
                "--threads", threads,
            )
            assert result.exit_code == 0, result.output

        assert (tmp_path / "t1" / "manifest.json").read_bytes() == (
            tmp_path / "t8" / "manifest.json"
        ).read_bytes()


class TestStyle:
    """Tests for the style subcommand."""

    def test_separates_authors(self, invoke, style_manifest: Path, tmp_path: Path) -> None:
        """Should find works closer within than between authors."""
        out = tmp_path / "reports"

        result = invoke("style", "-i", str(style_manifest), "-o", str(out), "-k", "100")

        assert result.exit_code == 0, result.output
        assert sorted(p.name for p in out.iterdir()) == [
            "anosim.json",
            "config.echo",
            "dissimilarity.tsv",
            "heatmap.tsv",
            "manifest.json",
            "standard_profile.tsv",
        ]
        report = load_json(out / "anosim.json")
        assert report["R"] > 0.5
        assert report["works"] == 9
        assert report["group_sizes"] == {"author0": 3, "author1": 3, "author2": 3}
        # 280 distinct partitions of 3 groups of 3 fit in the budget
        assert report["exact"] is True
        heatmap = (out / "heatmap.tsv").read_text(encoding="utf-8").splitlines()
        assert len(heatmap) == 1 + 81

    def test_matches_library(self, invoke, style_manifest: Path, tmp_path: Path) -> None:
        """Should report the same statistic as calling the analysis directly."""
        out = tmp_path / "reports"
        policy = TokensConfig().to_policy()

        def opener(path: Path):
            def open_tokens() -> Iterator[str]:
                with open_source(path) as source:
                    yield from read_plain_text(source, policy=policy, gutenberg=True)

            return open_tokens

        works = [
            WorkSource(record.author_id, record.work_id, opener(record.path))
            for record in read_work_manifest(style_manifest)
        ]
        expected = style_report(works, K=100, seed=5)

        result = invoke(
            "style", "-i", str(style_manifest), "-o", str(out), "-k", "100", "--seed", "5"
        )

        assert result.exit_code == 0, result.output
        report = load_json(out / "anosim.json")
        assert report["R"] == pytest.approx(expected.result.R, abs=1e-12)
        assert report["p_value"] == pytest.approx(expected.result.p_value, abs=1e-12)

    def test_independent_of_threads(self, invoke, style_manifest: Path, tmp_path: Path) -> None:
        """Should produce byte-identical reports for any thread count."""
        for threads in ("1", "8"):
            result = invoke(
                "style", "-i", str(style_manifest), "-o", str(tmp_path / f"t{threads}"),
                "-k", "100", "--seed", "3", "--threads", threads,
            )
            assert result.exit_code == 0, result.output

        assert (tmp_path / "t1" / "manifest.json").read_bytes() == (
            tmp_path / "t8" / "manifest.json"
        ).read_bytes()

    def test_single_author(self, invoke, tmp_path: Path) -> None:
        """Should exit 4 when only one author remains."""
        lines = []
        for work in range(3):
            (tmp_path / f"w{work}.txt").write_text(author_text(0, work), encoding="utf-8")
            lines.append(f"solo\tw{work}\tw{work}.txt")
        manifest = tmp_path / "solo.tsv"
        manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")

        result = invoke("style", "-i", str(manifest), "-o", str(tmp_path / "reports"), "-k", "50")

        assert result.exit_code == 4
        assert not (tmp_path / "reports").exists()

    def test_missing_work_file(self, invoke, tmp_path: Path) -> None:
        """Should exit 2 when the manifest names a missing work."""
        manifest = tmp_path / "authors.tsv"
        manifest.write_text("ann\tw1\tgone.txt\n", encoding="utf-8")

        result = invoke("style", "-i", str(manifest), "-o", str(tmp_path / "reports"))

        assert result.exit_code == 2


class TestMonkey:
    """Tests for the monkey subcommand."""

    def test_generates_and_checks_lengths(self, invoke, tmp_path: Path) -> None:
        """Should write the corpus and compare word lengths with the geometric law."""
        out = tmp_path / "reports"

        result = invoke(
            "--json", "monkey", "--tokens", "20000", "--alphabet-size", "5",
            "--space-probability", "0.2", "--write-text", "--seed", "9", "-o", str(out),
        )

        assert result.exit_code == 0, result.output
        data = json.loads(result.stdout)
        assert data["summary"]["tokens"] == 20000
        assert "corpus.txt" in data["outputs"]
        words = (out / "corpus.txt").read_text(encoding="utf-8").split()
        assert len(words) == 20000
        assert set("".join(words)) <= set("abcde")
        report = load_json(out / "report.json")
        assert report["alphabet_size"] == 5
        assert report["length_checks"][0]["length"] == 1
        assert report["max_abs_z"] < 5

    def test_same_seed_same_output(self, invoke, tmp_path: Path) -> None:
        """Should be reproducible from the seed."""
        for name in ("a", "b"):
            result = invoke("monkey", "--tokens", "5000", "--seed", "4", "-o", str(tmp_path / name))
            assert result.exit_code == 0, result.output

        assert read_manifest(tmp_path / "a") == read_manifest(tmp_path / "b")

    def test_invalid_parameters(self, invoke, tmp_path: Path) -> None:
        """Should exit 2 for a space probability outside (0, 1)."""
        result = invoke("monkey", "--space-probability", "1.5", "-o", str(tmp_path / "r"))

        assert result.exit_code == 2


class TestConfigCommands:
    """Tests for config show and config validate."""

    def test_show_json(self, invoke) -> None:
        """Should print the merged configuration as JSON."""
        result = invoke("--json", "config", "show")

        assert result.exit_code == 0
        data = json.loads(result.stdout)
        assert data["config_valid"] is True
        assert data["config"]["analysis"]["kernel_size"] == 3000

    def test_show_uses_file(self, temp_config_file: Path) -> None:
        """Should reflect values from the config file."""
        result = CliRunner().invoke(main, ["-c", str(temp_config_file), "config", "show"])

        assert result.exit_code == 0
        assert "kernel_size = 500" in result.stdout

    def test_env_override(self, temp_config_file: Path, monkeypatch: pytest.MonkeyPatch) -> None:
        """Should apply environment overrides on top of the file."""
        monkeypatch.setenv("KERNEL_LEXICON_THREADS", "5")

        result = CliRunner().invoke(
            main, ["--json", "-c", str(temp_config_file), "config", "show"]
        )

        assert json.loads(result.stdout)["config"]["run"]["threads"] == 5

    def test_validate_invalid(self, tmp_path: Path) -> None:
        """Should exit 2 for a config that parses but fails validation."""
        config_path = tmp_path / "config.toml"
        config_path.write_text("[analysis]\nkernel_size = 0\n", encoding="utf-8")

        result = CliRunner().invoke(main, ["-c", str(config_path), "config", "validate"])

        assert result.exit_code == 2
        assert "kernel_size" in result.stderr

    def test_unreadable_config(self, tmp_path: Path) -> None:
        """Should exit 2 for malformed TOML."""
        config_path = tmp_path / "config.toml"
        config_path.write_text("[analysis\n", encoding="utf-8")

        result = CliRunner().invoke(main, ["-c", str(config_path), "config", "show"])

        assert result.exit_code == 2
        assert "Error loading configuration" in result.stderr

    def test_version(self) -> None:
        """Should print the package version."""
        result = CliRunner().invoke(main, ["--version"])

        assert result.exit_code == 0
        assert "kernel-lexicon" in result.stdout
