"""Filesystem utilities for manifests, reports and stores."""

from __future__ import annotations

import json
import logging
import os
import tempfile
from collections.abc import Iterable, Iterator
from pathlib import Path
from typing import Any

from src.exceptions import FileAccessError

log = logging.getLogger(__name__)


def read_text(path: Path) -> str:
    """Read a UTF-8 file.

    Raises:
        FileAccessError: If the file cannot be read.
    """
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FileAccessError(f"Failed to read {path}: {exc}") from exc


def read_json(path: Path) -> Any:
    """Read and decode a JSON file.

    Raises:
        FileAccessError: If the file cannot be read or is not valid JSON.
    """
    try:
        return json.loads(read_text(path))
    except json.JSONDecodeError as exc:
        raise FileAccessError(
            f"Invalid JSON in {path} at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc


def iter_jsonl(path: Path) -> Iterator[tuple[int, Any]]:
    """Yield (line number, record) for each non-blank line of a JSON-lines file.

    Raises:
        FileAccessError: If the file cannot be read or a line is not valid JSON.
    """
    for lineno, line in enumerate(read_text(path).splitlines(), start=1):
        if not line.strip():
            continue
        try:
            yield lineno, json.loads(line)
        except json.JSONDecodeError as exc:
            raise FileAccessError(f"Invalid JSON in {path}:{lineno}: {exc.msg}") from exc


def dumps_line(record: Any) -> str:
    return json.dumps(record, ensure_ascii=False, sort_keys=True)


def write_text(path: Path, content: str) -> None:
    """Atomically replace ``path`` with ``content``.

    Raises:
        FileAccessError: If the file cannot be written.
    """
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(content)
        os.replace(tmp, path)
    except OSError as exc:
        raise FileAccessError(f"Failed to write {path}: {exc}") from exc
    log.info("[OK] Wrote %s", path)


def write_jsonl(path: Path, records: Iterable[Any]) -> int:
    """Write one JSON record per line; returns the record count.

    Raises:
        FileAccessError: If the file cannot be written.
    """
    lines = [dumps_line(record) for record in records]
    write_text(path, "".join(line + "\n" for line in lines))
    return len(lines)


def append_line(path: Path, line: str) -> None:
    """Append a single line, creating the file if needed.

    Raises:
        FileAccessError: If the file cannot be written.
    """
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("a", encoding="utf-8") as handle:
            handle.write(line + "\n")
    except OSError as exc:
        raise FileAccessError(f"Failed to append to {path}: {exc}") from exc
