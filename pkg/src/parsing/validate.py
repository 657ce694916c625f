"""Schema validation of parsed function calls."""

from __future__ import annotations

from src.constants import DONTCARE
from src.core.dialogue import FunctionCall
from src.core.schema import FunctionSpec, SchemaCatalog, ValueKind
from src.parsing.normalize import normalize_value
from src.parsing.outcome import ParseOutcome, ParseWarning, WarningKind

_MAX_SNAP_DISTANCE = 2


def _fold(name: str) -> str:
    return name.strip().lower().replace("_", "").replace(" ", "")


def resolve_function_name(name: str | None, catalog: SchemaCatalog) -> str | None:
    """Snap a model-produced function name onto the catalog.

    Matches ignore case, underscores and spaces; a bare domain name
    ("hotel") resolves to the single function named "<verb>_hotel".
    Returns None when nothing matches.
    """
    if not name:
        return None
    if name in catalog:
        return name
    folded = _fold(name)
    for candidate in catalog.names:
        if _fold(candidate) == folded:
            return candidate
    suffix_matches = [c for c in catalog.names if _fold(c.split("_", 1)[-1]) == folded]
    if len(suffix_matches) == 1:
        return suffix_matches[0]
    return None


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance."""
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb))
            )
        previous = current
    return previous[-1]


def snap_enum(value: str, allowed: tuple[str, ...], max_distance: int = _MAX_SNAP_DISTANCE) -> str:
    """Return the closest allowed option within ``max_distance`` edits, else ``value``."""
    lowered = value.strip().lower()
    best = min(allowed, key=lambda option: (edit_distance(lowered, option.lower()), option))
    if edit_distance(lowered, best.lower()) <= max_distance:
        return best
    return value


def validate_call(
    call: FunctionCall,
    spec: FunctionSpec,
    *,
    snap_enums: bool = False,
) -> ParseOutcome:
    """Check a call against the spec of the function it targets.

    Unknown slots are dropped, out-of-vocabulary categorical values are kept
    and flagged (or snapped when ``snap_enums`` is set), and a function name
    equal to the spec's up to case and underscores is coerced to it.
    """
    warnings: list[ParseWarning] = []
    function = call.function
    if function != spec.name and _fold(function) == _fold(spec.name):
        function = spec.name

    arguments: dict[str, str] = {}
    for key, value in call.arguments.items():
        slot = spec.slot(key)
        if slot is None:
            warnings.append(ParseWarning(WarningKind.UNKNOWN_SLOT, f"{spec.name}.{key}"))
            continue
        if slot.value_kind is ValueKind.CATEGORICAL and slot.allowed_values:
            normalized = normalize_value(slot, value)
            options = {normalize_value(slot, option) for option in slot.allowed_values}
            if normalized != DONTCARE and normalized not in options:
                snapped = snap_enum(value, slot.allowed_values) if snap_enums else value
                if snapped == value:
                    warnings.append(
                        ParseWarning(WarningKind.BAD_ENUM, f"{spec.name}.{key}={value}")
                    )
                value = snapped
        arguments[key] = value

    return ParseOutcome(
        call=FunctionCall(function=function, arguments=arguments),
        response="",
        warnings=tuple(warnings),
    )
