"""Slot value normalization for state comparison."""

from __future__ import annotations

import re

from src.constants import DONTCARE, DONTCARE_VARIANTS
from src.core.dialogue import Normalizer
from src.core.schema import SchemaCatalog, SlotSpec, ValueKind

_WHITESPACE_RE = re.compile(r"\s+")
_TIME_RE = re.compile(r"^(\d{1,2})(?:[:.](\d{2}))?\s*(am|pm|a\.m\.|p\.m\.)?$")

_NUMBER_WORDS = {
    "zero": "0",
    "one": "1",
    "two": "2",
    "three": "3",
    "four": "4",
    "five": "5",
    "six": "6",
    "seven": "7",
    "eight": "8",
    "nine": "9",
    "ten": "10",
}


def normalize_value(slot: SlotSpec | None, raw: str) -> str:
    """Canonical form of a slot value; idempotent."""
    value = _WHITESPACE_RE.sub(" ", raw.strip().lower())
    if value in DONTCARE_VARIANTS:
        return DONTCARE
    if slot is None:
        return value
    if slot.value_kind is ValueKind.TIME:
        return _normalize_time(value)
    if slot.value_kind is ValueKind.INTEGER:
        return _NUMBER_WORDS.get(value, value)
    return value


def _normalize_time(value: str) -> str:
    match = _TIME_RE.match(value)
    if match is None:
        return value
    hours, minutes, meridiem = match.groups()
    if minutes is None and meridiem is None:
        return value
    hour = int(hours)
    minute = int(minutes or 0)
    if meridiem:
        if hour < 1 or hour > 12:
            return value
        is_pm = meridiem.startswith("p")
        hour = hour % 12 + (12 if is_pm else 0)
    if hour > 23 or minute > 59:
        return value
    return f"{hour:02d}:{minute:02d}"


def make_normalizer(catalog: SchemaCatalog | None = None) -> Normalizer:
    """Bind ``normalize_value`` to a catalog so slots resolve to their specs."""

    def normalize(function: str, slot: str, raw: str) -> str:
        spec = None
        if catalog is not None and function in catalog:
            spec = catalog.get(function).slot(slot)
        return normalize_value(spec, raw)

    return normalize
