"""Streaming readers for plain text, Leipzig sentence files and Google 1-grams."""

from __future__ import annotations

import codecs
import gzip
import itertools
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import IO, TYPE_CHECKING

from kernel_lexicon.errors import FormatError, IngestError, ParameterError
from kernel_lexicon.ingest.tokenize import TokenPolicy, decode_text, tokenize
from kernel_lexicon.utils.logging import get_logger

if TYPE_CHECKING:
    from collections.abc import Iterable, Iterator

logger = get_logger(__name__)

GZIP_MAGIC = b"\x1f\x8b"
DEFAULT_CHUNK_SIZE = 1 << 16
# A run of text this long without whitespace is flushed as-is
MAX_CARRY_CHARS = 1 << 20
# Gutenberg headers are short; give up looking for the start marker after this
GUTENBERG_HEADER_LINES = 1000
GUTENBERG_START = b"*** START OF"
GUTENBERG_END = b"*** END OF"


@dataclass
class ReadStats:
    """Counters a line-oriented reader fills while streaming."""

    lines_read: int = 0
    malformed_lines: int = 0
    dropped_words: int = 0


@dataclass(frozen=True)
class YearedCount:
    """Occurrences of one word in one publication year."""

    word: str
    year: int
    count: int


@dataclass(frozen=True)
class GoogleColumnMap:
    """Zero-based column positions inside a Google 1-gram record."""

    word: int = 0
    year: int = 1
    count: int = 2

    def __post_init__(self) -> None:
        positions = (self.word, self.year, self.count)
        if min(positions) < 0 or len(set(positions)) != 3:
            raise ParameterError(f"Invalid 1-gram column map: {positions}")

    @property
    def width(self) -> int:
        """Minimum number of fields a record must have."""
        return max(self.word, self.year, self.count) + 1


def open_source(path: Path | str) -> IO[bytes]:
    """Open a corpus file for binary reading, decompressing gzip transparently.

    Raises:
        IngestError: If the file cannot be opened
    """
    path = Path(path)
    try:
        with open(path, "rb") as handle:
            magic = handle.read(2)
        if magic == GZIP_MAGIC:
            return gzip.open(path, "rb")
        return open(path, "rb")
    except OSError as e:
        raise IngestError(f"Cannot open corpus file: {e.strerror}", source=str(path)) from e


class _TokenCarry:
    """Tokenizes text fed in arbitrary pieces, cutting only at whitespace."""

    def __init__(self, policy: TokenPolicy, source: str | None) -> None:
        self.policy = policy
        self.source = source
        self._buffer = ""

    def feed(self, text: str) -> list[str]:
        buffer = self._buffer + text
        cut = _last_whitespace(buffer)
        if cut < 0:
            if len(buffer) > MAX_CARRY_CHARS:
                logger.warning(
                    "Flushing %d characters without whitespace",
                    len(buffer),
                    extra={"source": self.source},
                )
                self._buffer = ""
                return tokenize(buffer, self.policy)
            self._buffer = buffer
            return []
        self._buffer = buffer[cut + 1 :]
        return tokenize(buffer[: cut + 1], self.policy)

    def finish(self) -> list[str]:
        buffer, self._buffer = self._buffer, ""
        return tokenize(buffer, self.policy)


def _last_whitespace(text: str) -> int:
    for i in range(len(text) - 1, -1, -1):
        if text[i].isspace():
            return i
    return -1


def _read_chunks(source: IO[bytes], chunk_size: int, name: str | None) -> Iterator[bytes]:
    while True:
        try:
            chunk = source.read(chunk_size)
        except OSError as e:
            raise IngestError(f"Read failed: {e}", source=name) from e
        if not chunk:
            return
        yield chunk


def _with_offsets(pieces: Iterable[bytes]) -> Iterator[tuple[int, bytes]]:
    """Pair every piece with its byte offset in the source."""
    offset = 0
    for piece in pieces:
        yield offset, piece
        offset += len(piece)


def _gutenberg_body(lines: Iterable[bytes]) -> Iterator[tuple[int, bytes]]:
    """Yield (byte offset, line) for the lines between the Gutenberg markers.

    Files without a start marker in their header are passed through whole.
    """
    iterator = _with_offsets(lines)
    header: list[tuple[int, bytes]] = []
    for offset, line in iterator:
        if line.lstrip().startswith(GUTENBERG_START):
            break
        header.append((offset, line))
        if len(header) >= GUTENBERG_HEADER_LINES:
            break
    else:
        # Reached end of file without a marker
        yield from header
        return

    body: Iterable[tuple[int, bytes]]
    if header and len(header) >= GUTENBERG_HEADER_LINES:
        body = itertools.chain(header, iterator)
    else:
        body = iterator

    for offset, line in body:
        if line.lstrip().startswith(GUTENBERG_END):
            return
        yield offset, line


def read_plain_text(
    source: IO[bytes],
    policy: TokenPolicy | None = None,
    source_name: str | None = None,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    gutenberg: bool = False,
) -> Iterator[str]:
    """Stream tokens from a UTF-8 text source.

    Memory use is bounded by the chunk size plus the longest whitespace-free
    run. The token sequence equals ``tokenize`` of the whole decoded file for
    any chunk size.

    Args:
        source: Binary stream
        policy: Token policy
        source_name: Identifier used in errors and logs
        chunk_size: Bytes per read
        gutenberg: Drop Project Gutenberg header and license footer

    Yields:
        Tokens in text order

    Raises:
        IngestError: On read failure or invalid UTF-8 (with byte offset)
    """
    if policy is None:
        policy = TokenPolicy()
    if chunk_size < 1:
        raise ParameterError(f"chunk_size must be positive, got {chunk_size}")

    carry = _TokenCarry(policy, source_name)
    decoder = codecs.getincrementaldecoder("utf-8")(errors="strict")
    # Offset just past the last decoded piece; skipped Gutenberg lines count too
    consumed = 0

    pieces: Iterable[tuple[int, bytes]]
    if gutenberg:
        pieces = _gutenberg_body(_read_lines(source, source_name))
    else:
        pieces = _with_offsets(_read_chunks(source, chunk_size, source_name))

    for offset, piece in pieces:
        pending = len(decoder.getstate()[0])
        try:
            text = decoder.decode(piece)
        except UnicodeDecodeError as e:
            raise IngestError(
                f"Invalid UTF-8 sequence: {e.reason}",
                source=source_name,
                byte_offset=offset - pending + e.start,
            ) from e
        consumed = offset + len(piece)
        yield from carry.feed(text)

    try:
        tail = decoder.decode(b"", final=True)
    except UnicodeDecodeError as e:
        raise IngestError(
            "Truncated UTF-8 sequence at end of input",
            source=source_name,
            byte_offset=consumed - len(e.object) + e.start,
        ) from e
    yield from carry.feed(tail)
    yield from carry.finish()


def _read_lines(source: IO[bytes], name: str | None) -> Iterator[bytes]:
    try:
        yield from source
    except OSError as e:
        raise IngestError(f"Read failed: {e}", source=name) from e


def _numbered_lines(
    source: IO[bytes], name: str | None, stats: ReadStats
) -> Iterator[tuple[int, str]]:
    """Decode a stream line by line, tracking byte offsets for errors."""
    offset = 0
    for raw in _read_lines(source, name):
        stats.lines_read += 1
        try:
            line = decode_text(raw, source=name)
        except IngestError as e:
            raise IngestError(
                "Invalid UTF-8 sequence",
                source=name,
                byte_offset=offset + (e.byte_offset or 0),
            ) from e
        offset += len(raw)
        yield stats.lines_read, line.rstrip("\r\n")


def read_leipzig_sentences(
    source: IO[bytes],
    text_column: int = 1,
    delimiter: str = "\t",
    policy: TokenPolicy | None = None,
    source_name: str | None = None,
    stats: ReadStats | None = None,
) -> Iterator[str]:
    """Stream tokens from the text column of a Leipzig sentence file.

    Lines lacking the text column are skipped and counted in ``stats``.

    Raises:
        FormatError: If no non-blank line has the text column
    """
    if policy is None:
        policy = TokenPolicy()
    if stats is None:
        stats = ReadStats()
    if text_column < 0:
        raise ParameterError(f"text_column must be non-negative, got {text_column}")
    if len(delimiter) != 1:
        raise ParameterError(f"delimiter must be a single character, got {delimiter!r}")

    records = 0
    for line_number, line in _numbered_lines(source, source_name, stats):
        if not line.strip():
            continue
        records += 1
        fields = line.split(delimiter)
        if text_column >= len(fields):
            stats.malformed_lines += 1
            logger.debug(
                "Skipping line %d without column %d",
                line_number,
                text_column,
                extra={"source": source_name},
            )
            continue
        yield from tokenize(fields[text_column], policy)

    if records and stats.malformed_lines == records:
        raise FormatError(
            f"Column {text_column} is missing on every line", source=source_name
        )
    if stats.malformed_lines:
        logger.warning(
            "Skipped %d malformed lines",
            stats.malformed_lines,
            extra={"source": source_name},
        )


def read_google_1grams(
    source: IO[bytes],
    column_map: GoogleColumnMap | None = None,
    year_filter: tuple[int, int] | None = None,
    policy: TokenPolicy | None = None,
    strict: bool = False,
    source_name: str | None = None,
    stats: ReadStats | None = None,
) -> Iterator[YearedCount]:
    """Read a tab-separated Google 1-gram dump into aggregated yearly counts.

    Words are normalized through the token policy; a word that does not
    reduce to exactly one token is dropped. Counts for the same normalized
    (word, year) are summed, so the whole source is consumed before the
    first record is yielded. Records come out sorted by (word, year).

    Raises:
        FormatError: In strict mode, on the first malformed line
    """
    if column_map is None:
        column_map = GoogleColumnMap()
    if policy is None:
        policy = TokenPolicy()
    if stats is None:
        stats = ReadStats()
    if year_filter is not None and year_filter[0] > year_filter[1]:
        raise ParameterError(f"Empty year filter: {year_filter}")

    totals: defaultdict[tuple[str, int], int] = defaultdict(int)
    normalized: dict[str, str | None] = {}

    for line_number, line in _numbered_lines(source, source_name, stats):
        if not line:
            continue
        fields = line.split("\t")
        try:
            if len(fields) < column_map.width:
                raise ValueError(f"expected at least {column_map.width} fields")
            year = int(fields[column_map.year])
            count = int(fields[column_map.count])
            if count < 0:
                raise ValueError("negative count")
        except ValueError as e:
            if strict:
                raise FormatError(f"Malformed 1-gram record ({e})", source_name, line_number) from e
            stats.malformed_lines += 1
            continue

        if year_filter is not None and not year_filter[0] <= year <= year_filter[1]:
            continue

        raw_word = fields[column_map.word]
        if raw_word not in normalized:
            tokens = tokenize(raw_word, policy)
            normalized[raw_word] = tokens[0] if len(tokens) == 1 else None
        word = normalized[raw_word]
        if word is None:
            stats.dropped_words += 1
            continue
        totals[(word, year)] += count

    if stats.malformed_lines:
        logger.warning(
            "Skipped %d malformed 1-gram lines",
            stats.malformed_lines,
            extra={"source": source_name},
        )

    for (word, year), count in sorted(totals.items()):
        if count:
            yield YearedCount(word=word, year=year, count=count)


@dataclass(frozen=True)
class ManifestRecord:
    """One work listed in a style manifest."""

    author_id: str
    work_id: str
    path: Path


def read_work_manifest(path: Path | str) -> list[ManifestRecord]:
    """Read an ``author_id<TAB>work_id<TAB>path`` manifest.

    Blank lines and lines starting with ``#`` are ignored. Relative work
    paths are resolved against the manifest's directory.

    Raises:
        FormatError: On a line without three non-empty fields or a repeated work
    """
    path = Path(path)
    stats = ReadStats()
    records: list[ManifestRecord] = []
    seen: set[tuple[str, str]] = set()
    with open_source(path) as source:
        for line_number, line in _numbered_lines(source, str(path), stats):
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 3 or not all(field.strip() for field in fields):
                raise FormatError("Expected author_id<TAB>work_id<TAB>path", str(path), line_number)
            author_id, work_id, work_path = (field.strip() for field in fields)
            if (author_id, work_id) in seen:
                raise FormatError(
                    f"Work '{work_id}' of '{author_id}' listed twice", str(path), line_number
                )
            seen.add((author_id, work_id))
            resolved = Path(work_path)
            if not resolved.is_absolute():
                resolved = path.parent / resolved
            records.append(ManifestRecord(author_id, work_id, resolved))
    return records
