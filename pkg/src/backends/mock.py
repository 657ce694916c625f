"""Scripted backends for tests and offline runs."""

from __future__ import annotations

import threading
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

from src.backends.base import CompletionRequest, CompletionResult, FinishReason
from src.exceptions import BackendError, ConfigurationError, FileAccessError
from src.utils.filesystem import read_json


class ScriptedBackend:
    """Returns queued replies in order and records every request it sees.

    A queued ``BackendError`` instance is raised instead of returned.
    """

    def __init__(self, replies: Sequence[str | BackendError]) -> None:
        self._replies = list(replies)
        self._lock = threading.Lock()
        self.requests: list[CompletionRequest] = []

    @property
    def call_count(self) -> int:
        return len(self.requests)

    def complete(self, request: CompletionRequest) -> CompletionResult:
        with self._lock:
            self.requests.append(request)
            if not self._replies:
                raise BackendError("Scripted backend has no replies left")
            reply = self._replies.pop(0)
        if isinstance(reply, BackendError):
            raise reply
        return CompletionResult(text=reply, finish_reason=FinishReason.STOP)


@dataclass(frozen=True)
class MockRule:
    text: str
    contains: str | None = None
    stage: str | None = None

    def matches(self, request: CompletionRequest) -> bool:
        if self.stage is not None and self.stage != request.stage:
            return False
        if self.contains is not None and self.contains.lower() not in request.last_user.lower():
            return False
        return True


class RuleBackend:
    """Answers each request from the first rule matching its stage and last user message.

    Replies depend only on the request, so runs are deterministic under any
    parallelism. Unmatched requests finish with ``error``.
    """

    def __init__(self, rules: Sequence[MockRule]) -> None:
        self._rules = tuple(rules)
        self._lock = threading.Lock()
        self.call_count = 0

    @classmethod
    def from_file(cls, path: Path) -> RuleBackend:
        """Raises:
        ConfigurationError: If the script is unreadable or malformed.
        """
        try:
            raw = read_json(path)
            rules = [
                MockRule(text=item["text"], contains=item.get("contains"), stage=item.get("stage"))
                for item in raw
            ]
        except (FileAccessError, KeyError, TypeError) as exc:
            raise ConfigurationError(f"Invalid mock script {path}: {exc}") from exc
        return cls(rules)

    def complete(self, request: CompletionRequest) -> CompletionResult:
        with self._lock:
            self.call_count += 1
        for rule in self._rules:
            if rule.matches(request):
                return CompletionResult(text=rule.text, finish_reason=FinishReason.STOP)
        return CompletionResult(text="", finish_reason=FinishReason.ERROR)
