"""Report directory assembly: TSV series, JSON reports, config echo and manifest."""

from __future__ import annotations

import math
import numbers
from pathlib import Path
from typing import TYPE_CHECKING, Any

import yaml

from kernel_lexicon import __version__
from kernel_lexicon.reports.models import Manifest, ManifestEntry
from kernel_lexicon.utils.atomic import atomic_write, content_hash, safe_mkdir
from kernel_lexicon.utils.logging import get_logger

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from pydantic import BaseModel

    from kernel_lexicon.analysis.stylometry import DissimilarityMatrix
    from kernel_lexicon.frequency.table import FrequencyTable

logger = get_logger(__name__)

MANIFEST_NAME = "manifest.json"
ECHO_NAME = "config.echo"
MISSING = "NA"


def format_cell(value: object) -> str:
    """Render one TSV cell.

    Floats use the shortest repr that round-trips; None and non-finite
    values become ``NA``.
    """
    if value is None:
        return MISSING
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, numbers.Integral):
        return str(int(value))
    if isinstance(value, numbers.Real):
        number = float(value)
        return repr(number) if math.isfinite(number) else MISSING
    return str(value)


class ReportWriter:
    """Writes report files into a (staging) directory.

    Every file goes through ``atomic_write``; the manifest lists all of
    them with content hashes.
    """

    def __init__(self, directory: Path | str) -> None:
        self.directory = safe_mkdir(directory)
        self._written: list[str] = []

    @property
    def written(self) -> list[str]:
        """Relative paths of files written so far, in sorted order."""
        return sorted(self._written)

    def _path(self, name: str) -> Path:
        if name in self._written:
            raise ValueError(f"Report file written twice: {name}")
        self._written.append(name)
        path = self.directory / name
        safe_mkdir(path.parent)
        return path

    def write_text(self, name: str, content: str) -> Path:
        path = self._path(name)
        atomic_write(path, content)
        logger.debug("Wrote %s", name)
        return path

    def write_json(self, name: str, model: BaseModel) -> Path:
        """Write a pydantic model as indented JSON; NaN becomes null."""
        return self.write_text(name, model.model_dump_json(indent=2) + "\n")

    def write_tsv(
        self,
        name: str,
        header: Sequence[str],
        rows: Iterable[Sequence[object]],
    ) -> Path:
        """Write a header line plus one tab-separated line per row."""
        lines = ["\t".join(header)]
        lines.extend("\t".join(format_cell(cell) for cell in row) for row in rows)
        return self.write_text(name, "\n".join(lines) + "\n")

    def write_table(self, name: str, table: FrequencyTable) -> Path:
        path = self._path(name)
        table.write_tsv(path)
        return path

    def write_matrix(self, name: str, matrix: DissimilarityMatrix) -> Path:
        """Square matrix with two label header rows (work ids, author ids)."""
        lines = [
            "\t".join(["work_id", ""] + list(matrix.work_ids)),
            "\t".join(["", "author_id"] + list(matrix.author_ids)),
        ]
        for i in range(matrix.n):
            cells = [format_cell(float(value)) for value in matrix.values[i]]
            lines.append("\t".join([matrix.work_ids[i], matrix.author_ids[i], *cells]))
        return self.write_text(name, "\n".join(lines) + "\n")

    def write_echo(self, settings: dict[str, Any]) -> Path:
        """Dump the effective run settings as YAML."""
        content = yaml.safe_dump(
            settings,
            sort_keys=True,
            allow_unicode=True,
            default_flow_style=False,
        )
        return self.write_text(ECHO_NAME, content)

    def write_manifest(self, subcommand: str) -> Manifest:
        """Hash every written file and write ``manifest.json`` last."""
        entries = [
            ManifestEntry(
                path=name,
                hash=content_hash(self.directory / name),
                size=(self.directory / name).stat().st_size,
            )
            for name in self.written
        ]
        manifest = Manifest(subcommand=subcommand, tool_version=__version__, entries=entries)
        self.write_json(MANIFEST_NAME, manifest)
        return manifest


def read_manifest(directory: Path | str) -> Manifest:
    """Load the manifest of a finished report directory."""
    path = Path(directory) / MANIFEST_NAME
    return Manifest.model_validate_json(path.read_text(encoding="utf-8"))
