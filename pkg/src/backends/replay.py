"""Record/replay store keyed by request fingerprint."""

from __future__ import annotations

import logging
import threading
from datetime import datetime, timezone
from pathlib import Path

from src.backends.base import Backend, CompletionRequest, CompletionResult
from src.exceptions import FileAccessError, FixtureMissingError, StoreError
from src.utils.filesystem import append_line, dumps_line, iter_jsonl

log = logging.getLogger(__name__)


class ReplayStore:
    """JSON-lines file of ``{key, request, result, timestamp}`` records.

    Entries are loaded once; writes are serialized by a lock and appended.
    A later record for the same key overrides earlier ones.
    """

    def __init__(self, path: Path) -> None:
        self._path = path
        self._lock = threading.Lock()
        self._entries: dict[str, CompletionResult] = {}
        if path.exists():
            self._load()

    def _load(self) -> None:
        try:
            for lineno, record in iter_jsonl(self._path):
                try:
                    self._entries[record["key"]] = CompletionResult.from_dict(record["result"])
                except (KeyError, TypeError, ValueError) as exc:
                    raise StoreError(f"Bad replay record {self._path}:{lineno}: {exc}") from exc
        except FileAccessError as exc:
            raise StoreError(str(exc)) from exc
        log.debug("Loaded %d replay entries from %s", len(self._entries), self._path)

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, key: str) -> CompletionResult | None:
        return self._entries.get(key)

    def put(self, request: CompletionRequest, result: CompletionResult) -> None:
        """Persist a pair.

        Raises:
            StoreError: If the store file cannot be written.
        """
        record = {
            "key": request.key,
            "request": request.to_dict(),
            "result": result.to_dict(),
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }
        with self._lock:
            try:
                append_line(self._path, dumps_line(record))
            except FileAccessError as exc:
                raise StoreError(str(exc)) from exc
            self._entries[request.key] = result


class ReplayBackend:
    """Serves recorded completions; never touches the network."""

    def __init__(self, store: ReplayStore) -> None:
        self._store = store

    def complete(self, request: CompletionRequest) -> CompletionResult:
        """Raises:
        FixtureMissingError: If the request was never recorded.
        """
        result = self._store.get(request.key)
        if result is None:
            raise FixtureMissingError(request.key)
        return result


class RecordingBackend:
    """Forwards to another backend and stores every exchange."""

    def __init__(self, wrapped: Backend, store: ReplayStore) -> None:
        self._wrapped = wrapped
        self._store = store

    def complete(self, request: CompletionRequest) -> CompletionResult:
        result = self._wrapped.complete(request)
        self._store.put(request, result)
        return result


def record_mode(wrap: Backend, store_path: Path) -> RecordingBackend:
    """Wrap ``wrap`` so that its exchanges can later be replayed from ``store_path``."""
    return RecordingBackend(wrap, ReplayStore(store_path))


def replay_mode(store_path: Path) -> ReplayBackend:
    """Raises:
    StoreError: If the store exists but cannot be parsed.
    """
    if not store_path.exists():
        log.warning("Replay store %s does not exist; every request will miss", store_path)
    return ReplayBackend(ReplayStore(store_path))
