"""Completion requests, results and the backend interface."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Protocol

from src.constants import DEFAULT_MAX_TOKENS, DEFAULT_TEMPERATURE, DEFAULT_TOP_P
from src.exceptions import BackendError
from src.prompts.templates import ChatMessage, Role
from src.utils.hashing import content_hash


@dataclass(frozen=True)
class GenerationParams:
    temperature: float = DEFAULT_TEMPERATURE
    top_p: float = DEFAULT_TOP_P
    max_tokens: int = DEFAULT_MAX_TOKENS
    stop_sequences: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise BackendError(f"temperature must be >= 0, got {self.temperature}")
        if not 0 < self.top_p <= 1:
            raise BackendError(f"top_p must be in (0, 1], got {self.top_p}")
        if self.max_tokens < 1:
            raise BackendError(f"max_tokens must be >= 1, got {self.max_tokens}")

    def with_limits(self, max_tokens: int, stop: str) -> GenerationParams:
        """Cap ``max_tokens`` and add a stop sequence."""
        stops = self.stop_sequences if stop in self.stop_sequences else (*self.stop_sequences, stop)
        return replace(self, max_tokens=min(self.max_tokens, max_tokens), stop_sequences=stops)

    def to_dict(self) -> dict[str, Any]:
        return {
            "temperature": self.temperature,
            "top_p": self.top_p,
            "max_tokens": self.max_tokens,
            "stop_sequences": list(self.stop_sequences),
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> GenerationParams:
        return cls(
            temperature=float(raw["temperature"]),
            top_p=float(raw["top_p"]),
            max_tokens=int(raw["max_tokens"]),
            stop_sequences=tuple(raw.get("stop_sequences", ())),
        )


@dataclass(frozen=True)
class CompletionRequest:
    """Chat messages (or a pre-templated prompt) plus generation settings.

    ``stage`` labels the pipeline stage for logging and scripted mocks; it
    is not part of the request fingerprint.
    """

    messages: tuple[ChatMessage, ...]
    params: GenerationParams = field(default_factory=GenerationParams)
    model_id: str = ""
    prompt: str | None = None
    stage: str = ""

    def __post_init__(self) -> None:
        if not self.messages and not self.prompt:
            raise BackendError("Completion request needs messages or a prompt")

    @property
    def last_user(self) -> str:
        for message in reversed(self.messages):
            if message.role is Role.USER:
                return message.content
        return self.prompt or ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "messages": [message.to_dict() for message in self.messages],
            "prompt": self.prompt,
            "params": self.params.to_dict(),
            "model_id": self.model_id,
        }

    @property
    def key(self) -> str:
        """Stable fingerprint of messages, prompt, params and model id."""
        return content_hash(self.to_dict())


class FinishReason(str, Enum):
    STOP = "stop"
    LENGTH = "length"
    ERROR = "error"


@dataclass(frozen=True)
class CompletionResult:
    text: str
    finish_reason: FinishReason = FinishReason.STOP
    usage: dict[str, int] | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"text": self.text, "finish_reason": self.finish_reason.value, "usage": self.usage}

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> CompletionResult:
        return cls(
            text=str(raw["text"]),
            finish_reason=FinishReason(raw["finish_reason"]),
            usage=raw.get("usage"),
        )


class Backend(Protocol):
    """Anything that turns a request into a completion. Must be thread-safe."""

    def complete(self, request: CompletionRequest) -> CompletionResult: ...


def apply_stop_sequences(result: CompletionResult, stops: tuple[str, ...]) -> CompletionResult:
    """Cut the text at the earliest stop sequence, which is excluded."""
    cut = min((i for i in (result.text.find(s) for s in stops if s) if i >= 0), default=-1)
    if cut < 0:
        return result
    return CompletionResult(result.text[:cut], FinishReason.STOP, result.usage)


def complete(request: CompletionRequest, backend: Backend) -> CompletionResult:
    """Run a request and enforce its stop sequences client-side."""
    result = backend.complete(request)
    if result.finish_reason is FinishReason.ERROR:
        return result
    return apply_stop_sequences(result, request.params.stop_sequences)
