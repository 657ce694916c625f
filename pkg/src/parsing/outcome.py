"""Parse outcomes and the warnings that explain them."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from src.core.dialogue import FunctionCall


class WarningKind(str, Enum):
    """Deviations from a clean parse or a clean turn."""

    # raised while parsing model output
    UNKNOWN_SLOT = "unknown_slot"
    BAD_ENUM = "bad_enum"
    REPAIRED_JSON = "repaired_json"
    MISSING_CLOSE_TAG = "missing_close_tag"
    EMPTY_CALL = "empty_call"
    # raised by the tracker
    NO_SELECTION = "no_selection"
    SELECTION_FALLBACK = "selection_fallback"
    FUNCTION_MISMATCH = "function_mismatch"
    UNKNOWN_FUNCTION = "unknown_function"
    BACKEND_ERROR = "backend_error"


@dataclass(frozen=True)
class ParseWarning:
    kind: WarningKind
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.kind.value}: {self.detail}" if self.detail else self.kind.value

    def to_dict(self) -> dict[str, str]:
        return {"kind": self.kind.value, "detail": self.detail}


@dataclass(frozen=True)
class ParseOutcome:
    """Result of pulling a function call out of model output."""

    call: FunctionCall | None
    response: str
    warnings: tuple[ParseWarning, ...] = field(default=())

    @property
    def warning_kinds(self) -> list[str]:
        return [w.kind.value for w in self.warnings]
