"""Chat messages and per-model chat templates.

A template wraps each role's content in begin/end markers. Marker text
that shows up inside message content is escaped by inserting a backslash
after the first character of every special token (``<|end|>`` becomes
``<\\|end|>``), so message content can never open or close a turn. A run of
backslashes already sitting in that position gains one more, which keeps
the escape one-to-one.
"""

from __future__ import annotations

import json
import logging
import re
from collections.abc import Iterable
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

from src.constants import TEMPLATE_REGISTRY
from src.exceptions import PromptError, TemplateError

log = logging.getLogger(__name__)

_TEMPLATE_KEYS = (
    "name",
    "system_begin",
    "system_end",
    "user_begin",
    "user_end",
    "assistant_begin",
    "assistant_end",
    "placement",
    "generation_cue",
)


class Role(str, Enum):
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"


class Placement(str, Enum):
    """Where the system prompt goes."""

    STANDALONE = "standalone-message"
    PREFIXED = "prefixed-to-first-user"


@dataclass(frozen=True)
class ChatMessage:
    role: Role
    content: str

    def __post_init__(self) -> None:
        if self.role is not Role.SYSTEM and not self.content:
            raise PromptError(f"{self.role.value} message cannot be empty")

    def to_dict(self) -> dict[str, str]:
        return {"role": self.role.value, "content": self.content}


@dataclass(frozen=True)
class ChatTemplate:
    """Role markers and system placement for one model family."""

    name: str
    system_begin: str
    system_end: str
    user_begin: str
    user_end: str
    assistant_begin: str
    assistant_end: str
    placement: Placement = Placement.STANDALONE
    generation_cue: str = ""
    special_tokens: tuple[str, ...] = field(default=())
    _marker_re: re.Pattern[str] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.name:
            raise TemplateError("Chat template needs a name")
        if not (self.user_begin or self.user_end):
            raise TemplateError(f"Template '{self.name}' has no user markers")
        if not self.special_tokens:
            object.__setattr__(self, "special_tokens", self._derive_tokens())
        alternatives = (
            re.escape(token[0]) + r"\\*" + re.escape(token[1:])
            for token in sorted(self.special_tokens, key=len, reverse=True)
        )
        object.__setattr__(self, "_marker_re", re.compile("|".join(alternatives) or "(?!)"))

    def _derive_tokens(self) -> tuple[str, ...]:
        markers = (
            self.system_begin,
            self.system_end,
            self.user_begin,
            self.user_end,
            self.assistant_begin,
            self.assistant_end,
            self.generation_cue,
        )
        tokens = {piece for marker in markers for piece in marker.split() if len(piece) > 1}
        return tuple(sorted(tokens))

    def begin(self, role: Role) -> str:
        return getattr(self, f"{role.value}_begin")  # type: ignore[no-any-return]

    def end(self, role: Role) -> str:
        return getattr(self, f"{role.value}_end")  # type: ignore[no-any-return]

    def escape(self, content: str) -> str:
        """Neutralize special tokens inside message content."""
        return self._marker_re.sub(lambda match: match[0][0] + "\\" + match[0][1:], content)


class TemplateRegistry:
    """Read-only collection of chat templates keyed by name."""

    def __init__(self, templates: Iterable[ChatTemplate]) -> None:
        self._templates: dict[str, ChatTemplate] = {}
        for template in templates:
            if template.name in self._templates:
                raise TemplateError(f"Duplicate chat template: {template.name}")
            self._templates[template.name] = template

    @classmethod
    def load(cls, path: Path = TEMPLATE_REGISTRY) -> TemplateRegistry:
        """Read a registry file: a JSON array of template objects.

        Raises:
            TemplateError: If the file is unreadable or a template is malformed.
        """
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise TemplateError(f"Failed to read template registry {path}: {exc}") from exc
        if not isinstance(raw, list):
            raise TemplateError(f"Template registry {path} must be a JSON array")
        registry = cls(_template_from_dict(item) for item in raw)
        log.debug("Loaded %d chat templates from %s", len(registry), path)
        return registry

    def __len__(self) -> int:
        return len(self._templates)

    def __contains__(self, name: object) -> bool:
        return name in self._templates

    @property
    def names(self) -> list[str]:
        return list(self._templates)

    def get(self, name: str) -> ChatTemplate:
        """Raises:
        TemplateError: If no template has that name.
        """
        try:
            return self._templates[name]
        except KeyError:
            known = ", ".join(self._templates)
            raise TemplateError(f"Unknown chat template '{name}' (known: {known})") from None


def _template_from_dict(raw: Any) -> ChatTemplate:
    if not isinstance(raw, dict):
        raise TemplateError("Template entries must be objects")
    missing = [key for key in _TEMPLATE_KEYS if key not in raw]
    if missing:
        raise TemplateError(f"Template {raw.get('name', '?')} is missing {missing}")
    try:
        placement = Placement(raw["placement"])
    except ValueError:
        raise TemplateError(f"Unknown placement '{raw['placement']}'") from None
    return ChatTemplate(
        name=raw["name"],
        system_begin=raw["system_begin"],
        system_end=raw["system_end"],
        user_begin=raw["user_begin"],
        user_end=raw["user_end"],
        assistant_begin=raw["assistant_begin"],
        assistant_end=raw["assistant_end"],
        placement=placement,
        generation_cue=raw["generation_cue"],
        special_tokens=tuple(raw.get("special_tokens", ())),
    )


def apply_chat_template(messages: list[ChatMessage], template: ChatTemplate) -> str:
    """Render messages into a single prompt string ending with the generation cue.

    Raises:
        TemplateError: If a system message appears anywhere but first, or twice.
    """
    system: str | None = None
    body = messages
    if messages and messages[0].role is Role.SYSTEM:
        system = template.escape(messages[0].content)
        body = messages[1:]
    if any(message.role is Role.SYSTEM for message in body):
        raise TemplateError("Only one leading system message is allowed")

    system_block = (
        template.system_begin + system + template.system_end if system is not None else ""
    )
    parts: list[str] = []
    if template.placement is Placement.STANDALONE:
        parts.append(system_block)
        system_block = ""

    for message in body:
        content = template.escape(message.content)
        if message.role is Role.USER and system_block:
            content = system_block + content
            system_block = ""
        parts.append(template.begin(message.role) + content + template.end(message.role))

    if system_block:
        parts.append(template.user_begin + system_block + template.user_end)
    parts.append(template.generation_cue)
    return "".join(parts)


def count_prompt_units(text: str) -> int:
    """Whitespace-delimited unit count, a tokenizer-independent length proxy."""
    return len(text.split())


def count_message_units(messages: list[ChatMessage]) -> int:
    return sum(count_prompt_units(message.content) for message in messages)
