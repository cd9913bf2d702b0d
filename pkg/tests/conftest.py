"""Shared pytest fixtures for kernel-lexicon tests."""

import gzip
import logging
from collections.abc import Iterator
from pathlib import Path

import pytest

from tests.factories import author_text, synthetic_drift_lines

SAMPLE_TEXT = """The quick brown fox jumps over the lazy dog.
The dog sleeps; the fox runs away, and the dog's owner laughs 3 times!
"""

LEIPZIG_LINES = [
    "1\tThe cat sat on the mat.",
    "2\tA dog barked at the cat.",
    "",
    "3\tThe mat was red.",
]

GOOGLE_LINES = [
    "The\t1900\t10\t3",
    "the\t1900\t5\t2",
    "cat\t1900\t4\t1",
    "cat\t1901\t6\t1",
    "dog\t1901\t2\t1",
    "1984\t1901\t7\t1",
]


@pytest.fixture(autouse=True)
def reset_package_logger() -> Iterator[None]:
    """Undo handlers installed by CLI runs between tests."""
    yield
    logger = logging.getLogger("kernel_lexicon")
    logger.handlers.clear()
    logger.setLevel(logging.NOTSET)


@pytest.fixture
def sample_text_file(tmp_path: Path) -> Path:
    """A small plain-text corpus."""
    path = tmp_path / "sample.txt"
    path.write_text(SAMPLE_TEXT, encoding="utf-8")
    return path


@pytest.fixture
def leipzig_file(tmp_path: Path) -> Path:
    """A Leipzig-style sentence file: id<TAB>sentence."""
    path = tmp_path / "eng_news-sentences.txt"
    path.write_text("\n".join(LEIPZIG_LINES) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def google_file(tmp_path: Path) -> Path:
    """A gzipped Google 1-gram sample: word, year, match_count, volume_count."""
    path = tmp_path / "eng-1gram.tsv.gz"
    with gzip.open(path, "wt", encoding="utf-8") as f:
        f.write("\n".join(GOOGLE_LINES) + "\n")
    return path


@pytest.fixture
def drift_file(tmp_path: Path) -> Path:
    """A synthetic 64-year 1-gram corpus with gradual kernel turnover."""
    path = tmp_path / "drift-1gram.tsv"
    path.write_text("\n".join(synthetic_drift_lines()) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def style_manifest(tmp_path: Path) -> Path:
    """Manifest of 3 synthetic authors with 3 works each."""
    works_dir = tmp_path / "works"
    works_dir.mkdir()
    lines = []
    for author in range(3):
        for work in range(3):
            name = f"a{author}_w{work}.txt"
            (works_dir / name).write_text(author_text(author, work), encoding="utf-8")
            lines.append(f"author{author}\twork{work}\tworks/{name}")
    path = tmp_path / "authors.tsv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def temp_config_file(tmp_path: Path) -> Path:
    """Create a temporary config file."""
    config_path = tmp_path / "config.toml"
    config_path.write_text("""
[tokens]
lowercase_fold = true
min_token_length = 2

[analysis]
kernel_size = 500
intervals = [1, 2, 4]
seed = 11

[run]
threads = 2
out = "./out"
""")
    return config_path
