"""Atomic file and directory operations for safe writes."""

from __future__ import annotations

import hashlib
import os
import shutil
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Iterator


def atomic_write(path: Path | str, content: str | bytes, mode: str = "w") -> None:
    """Write content to file atomically using temp file + rename.

    The temp file is created in the same directory so the rename stays on
    one filesystem.

    Args:
        path: Target file path
        content: Content to write
        mode: Write mode ('w' for text, 'wb' for binary)
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    fd, temp_path = tempfile.mkstemp(
        dir=path.parent,
        prefix=f".{path.name}.",
        suffix=".tmp",
    )

    try:
        if "b" in mode:
            with os.fdopen(fd, mode) as f:
                f.write(content)
        else:
            with os.fdopen(fd, mode, encoding="utf-8", newline="\n") as f:
                f.write(content)
        os.replace(temp_path, path)
    except BaseException:
        try:
            os.unlink(temp_path)
        except OSError:
            pass
        raise


def safe_mkdir(path: Path | str) -> Path:
    """Create directory if it doesn't exist, returning the path.

    Args:
        path: Directory path to create

    Returns:
        The created/existing directory path
    """
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path


@contextmanager
def staged_directory(target: Path | str) -> Iterator[Path]:
    """Stage a directory's contents and promote them only on success.

    Yields a hidden sibling directory. When the block exits cleanly the
    staged directory replaces ``target``; on any exception it is removed and
    ``target`` is left untouched.

    Args:
        target: Final directory path

    Yields:
        Path of the staging directory
    """
    target = Path(target)
    parent = safe_mkdir(target.parent if str(target.parent) else Path("."))
    staging = Path(tempfile.mkdtemp(dir=parent, prefix=f".{target.name}.", suffix=".staging"))

    try:
        yield staging
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise

    retired: Path | None = None
    if target.exists():
        retired = Path(tempfile.mkdtemp(dir=parent, prefix=f".{target.name}.", suffix=".old"))
        os.rmdir(retired)
        os.replace(target, retired)
    try:
        os.replace(staging, target)
    except BaseException:
        if retired is not None:
            os.replace(retired, target)
        shutil.rmtree(staging, ignore_errors=True)
        raise
    if retired is not None:
        shutil.rmtree(retired, ignore_errors=True)


def content_hash(path: Path | str) -> str:
    """Compute the SHA-256 hash of a file's bytes.

    Args:
        path: File to hash

    Returns:
        Hash string prefixed with the algorithm name
    """
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            digest.update(block)
    return "sha256:" + digest.hexdigest()
