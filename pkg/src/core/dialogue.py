"""Dialogue state, function calls and conversation context."""

from __future__ import annotations

import json
from collections.abc import Callable, Iterator, Mapping
from dataclasses import dataclass, field
from typing import Any

from src.constants import EMPTY_VALUES
from src.exceptions import TrackerError

Normalizer = Callable[[str, str, str], str]
"""(function, slot, raw value) -> comparable value."""


@dataclass(frozen=True)
class FunctionCall:
    """One predicted call: a function name plus its arguments."""

    function: str
    arguments: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.function:
            raise TrackerError("Function call needs a function name")
        object.__setattr__(self, "arguments", dict(self.arguments))

    def to_json(self) -> str:
        """Serialize as the ``{"function": ..., "arguments": ...}`` payload."""
        return json.dumps(
            {"function": self.function, "arguments": dict(self.arguments)}, ensure_ascii=False
        )

    def to_dict(self) -> dict[str, Any]:
        return {"function": self.function, "arguments": dict(self.arguments)}

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> FunctionCall:
        return cls(
            function=str(raw["function"]),
            arguments={str(k): str(v) for k, v in raw.get("arguments", {}).items()},
        )


@dataclass(frozen=True)
class DialogueState:
    """Tracked slot values per function (domain)."""

    per_domain: Mapping[str, Mapping[str, str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        cleaned: dict[str, dict[str, str]] = {}
        for domain, slots in self.per_domain.items():
            if not domain:
                raise TrackerError("Dialogue state cannot store an empty domain name")
            kept = {slot: value for slot, value in slots.items() if not _is_empty(value)}
            if kept:
                cleaned[domain] = kept
        object.__setattr__(self, "per_domain", cleaned)

    def __iter__(self) -> Iterator[tuple[str, str, str]]:
        for domain, slots in self.per_domain.items():
            for slot, value in slots.items():
                yield domain, slot, value

    def __len__(self) -> int:
        return sum(len(slots) for slots in self.per_domain.values())

    @property
    def domains(self) -> frozenset[str]:
        return frozenset(self.per_domain)

    def restrict(self, domain: str) -> DialogueState:
        """Return the state of a single domain."""
        if domain not in self.per_domain:
            return DialogueState()
        return DialogueState({domain: self.per_domain[domain]})

    def to_dict(self) -> dict[str, dict[str, str]]:
        return {
            domain: dict(sorted(slots.items())) for domain, slots in sorted(self.per_domain.items())
        }

    def to_json(self) -> str:
        """Canonical serialization: keys sorted at both levels."""
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_dict(cls, raw: Mapping[str, Mapping[str, Any]]) -> DialogueState:
        return cls({d: {s: str(v) for s, v in slots.items()} for d, slots in raw.items()})


@dataclass(frozen=True)
class AssistantOutput:
    """Assistant turn: an optional embedded call plus the response text."""

    call: FunctionCall | None = None
    response: str = ""

    def __post_init__(self) -> None:
        if self.call is None and not self.response:
            raise TrackerError("Assistant output needs a response when it has no call")

    def to_dict(self) -> dict[str, Any]:
        raw: dict[str, Any] = {"response": self.response}
        if self.call is not None:
            raw["call"] = self.call.to_dict()
        return raw

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> AssistantOutput:
        call = raw.get("call")
        return cls(
            call=FunctionCall.from_dict(call) if call else None,
            response=str(raw.get("response", "")),
        )


@dataclass(frozen=True)
class Turn:
    """A user utterance and, once answered, the assistant output."""

    user: str
    assistant: AssistantOutput | None = None

    def __post_init__(self) -> None:
        if not self.user:
            raise TrackerError("User utterance cannot be empty")


@dataclass(frozen=True)
class DialogueContext:
    """Ordered turns of a conversation; the turn index is the position."""

    turns: tuple[Turn, ...] = ()

    def __len__(self) -> int:
        return len(self.turns)

    @property
    def has_pending_user(self) -> bool:
        """True when the last turn is a user utterance still waiting for a reply."""
        return bool(self.turns) and self.turns[-1].assistant is None

    @property
    def pending_user(self) -> str:
        if not self.has_pending_user:
            raise TrackerError("Dialogue context has no pending user utterance")
        return self.turns[-1].user

    def with_user(self, utterance: str) -> DialogueContext:
        return DialogueContext(self.turns + (Turn(utterance),))

    def answered(self, output: AssistantOutput) -> DialogueContext:
        """Attach ``output`` to the pending user utterance."""
        if not self.has_pending_user:
            raise TrackerError("Dialogue context has no pending user utterance")
        return DialogueContext(self.turns[:-1] + (Turn(self.turns[-1].user, output),))

    def drop_earliest(self, count: int) -> DialogueContext:
        return DialogueContext(self.turns[count:])

    def to_list(self) -> list[dict[str, Any]]:
        return [
            {"user": turn.user, "assistant": turn.assistant.to_dict() if turn.assistant else None}
            for turn in self.turns
        ]

    @classmethod
    def from_list(cls, raw: list[Mapping[str, Any]]) -> DialogueContext:
        return cls(
            tuple(
                Turn(
                    user=str(item["user"]),
                    assistant=AssistantOutput.from_dict(item["assistant"])
                    if item.get("assistant")
                    else None,
                )
                for item in raw
            )
        )


def _is_empty(value: str) -> bool:
    return value.strip().lower() in EMPTY_VALUES


def update_state(prev: DialogueState, call: FunctionCall) -> DialogueState:
    """Return ``prev`` with the call's domain replaced by the call's arguments.

    Unfilled values ("none", "not mentioned", empty) are dropped. Other
    domains are carried over untouched and ``prev`` is not mutated.
    """
    per_domain = {domain: dict(slots) for domain, slots in prev.per_domain.items()}
    per_domain[call.function] = {
        slot: value for slot, value in call.arguments.items() if not _is_empty(value)
    }
    return DialogueState(per_domain)


def normalized_pairs(
    state: DialogueState, normalizer: Normalizer
) -> frozenset[tuple[str, str, str]]:
    """The state as a set of normalized (domain, slot, value) triples."""
    return frozenset(
        (domain, slot, normalizer(domain, slot, value)) for domain, slot, value in state
    )


def states_equal(a: DialogueState, b: DialogueState, normalizer: Normalizer) -> bool:
    """True iff both states hold the same normalized slot-value triples."""
    return normalized_pairs(a, normalizer) == normalized_pairs(b, normalizer)
