"""Domain schemas rendered as callable function specifications."""

from __future__ import annotations

import json
import logging
from collections.abc import Mapping
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

from src.config.validators import canonical_identifier, validate_identifier
from src.constants import MULTIWOZ_DESCRIPTIONS, TIME_FORMAT_HINT
from src.exceptions import SchemaError, SchemaValidationError

log = logging.getLogger(__name__)

_DOCUMENT_KEYS = frozenset({"version", "functions"})
_FUNCTION_KEYS = frozenset({"name", "description", "slots"})
_SLOT_KEYS = frozenset({"name", "description", "kind", "values", "required"})
_SLOT_REQUIRED_KEYS = frozenset({"name", "description", "kind"})

_JSON_TYPES = {
    "categorical": "string",
    "free_text": "string",
    "time": "string",
    "integer": "integer",
    "boolean": "boolean",
}


class ValueKind(str, Enum):
    """Kinds of values a slot can hold."""

    CATEGORICAL = "categorical"
    FREE_TEXT = "free_text"
    TIME = "time"
    INTEGER = "integer"
    BOOLEAN = "boolean"


@dataclass(frozen=True)
class SlotSpec:
    """One argument of a function, i.e. one slot of a domain."""

    name: str
    description: str
    value_kind: ValueKind = ValueKind.FREE_TEXT
    allowed_values: tuple[str, ...] | None = None
    is_required: bool = False

    def __post_init__(self) -> None:
        validate_identifier(self.name, "slot")
        if self.value_kind is ValueKind.CATEGORICAL:
            if not self.allowed_values:
                raise SchemaValidationError(f"Categorical slot '{self.name}' has no values")
            if len(set(self.allowed_values)) != len(self.allowed_values):
                raise SchemaValidationError(
                    f"Categorical slot '{self.name}' has duplicate values"
                )


@dataclass(frozen=True)
class FunctionSpec:
    """A domain schema seen as a function: name, description and ordered slots."""

    name: str
    description: str
    slots: tuple[SlotSpec, ...] = ()

    def __post_init__(self) -> None:
        validate_identifier(self.name, "function")
        names = [slot.name for slot in self.slots]
        duplicates = sorted({name for name in names if names.count(name) > 1})
        if duplicates:
            raise SchemaValidationError(
                f"Function '{self.name}' repeats slots: {', '.join(duplicates)}"
            )

    @property
    def slot_names(self) -> tuple[str, ...]:
        return tuple(slot.name for slot in self.slots)

    def slot(self, name: str) -> SlotSpec | None:
        """Return the slot called ``name``, or None."""
        for slot in self.slots:
            if slot.name == name:
                return slot
        return None


@dataclass(frozen=True)
class SchemaCatalog:
    """All functions available to the assistant, in declaration order."""

    functions: Mapping[str, FunctionSpec]
    version: str = ""
    _order: tuple[str, ...] = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.functions:
            raise SchemaValidationError("Catalog must declare at least one function")
        for name, spec in self.functions.items():
            if name != spec.name:
                raise SchemaValidationError(f"Catalog key '{name}' != function '{spec.name}'")
        object.__setattr__(self, "_order", tuple(self.functions))

    @classmethod
    def from_specs(cls, specs: list[FunctionSpec], version: str = "") -> SchemaCatalog:
        """Build a catalog, rejecting duplicate function names.

        Raises:
            SchemaValidationError: If two specs share a name.
        """
        functions: dict[str, FunctionSpec] = {}
        for spec in specs:
            if spec.name in functions:
                raise SchemaValidationError(f"Duplicate function name: {spec.name}")
            functions[spec.name] = spec
        return cls(functions=functions, version=version)

    @property
    def names(self) -> tuple[str, ...]:
        return self._order

    def __len__(self) -> int:
        return len(self._order)

    def __contains__(self, name: object) -> bool:
        return name in self.functions

    def get(self, name: str) -> FunctionSpec:
        """Return the function called ``name``.

        Raises:
            SchemaValidationError: If the catalog has no such function.
        """
        try:
            return self.functions[name]
        except KeyError:
            raise SchemaValidationError(f"Unknown function: {name}") from None

    def subset(self, names: list[str]) -> SchemaCatalog:
        """Return a catalog restricted to ``names``, kept in catalog order."""
        wanted = set(names)
        return SchemaCatalog(
            functions={n: s for n, s in self.functions.items() if n in wanted},
            version=self.version,
        )


# -- loading ----------------------------------------------------------------


def load_catalog(
    source: str,
    fmt: str = "native",
    *,
    descriptions: Mapping[str, Any] | None = None,
) -> SchemaCatalog:
    """Parse a schema document into a catalog.

    ``fmt`` is ``native`` (our JSON document) or ``multiwoz_ontology`` (the
    flat ``domain-slot`` key map of the MultiWOZ distribution). Ontology
    imports take slot descriptions, kinds and options from ``descriptions``,
    defaulting to the bundled MultiWOZ description file.

    Raises:
        SchemaError: If the document does not parse or has unexpected fields.
        SchemaValidationError: If the result breaks a catalog invariant.
    """
    document = _parse_json(source)
    if fmt == "native":
        return _load_native(document)
    if fmt == "multiwoz_ontology":
        if descriptions is None:
            descriptions = _parse_json(MULTIWOZ_DESCRIPTIONS.read_text(encoding="utf-8"))
        return _load_multiwoz_ontology(document, descriptions)
    raise SchemaError(f"Unknown schema format: {fmt}")


def load_catalog_file(path: Path, fmt: str = "native") -> SchemaCatalog:
    """Read and parse a schema file.

    Raises:
        SchemaError: If the file cannot be read or parsed.
    """
    try:
        source = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"Failed to read schema {path}: {exc}") from exc
    return load_catalog(source, fmt)


def _parse_json(source: str) -> Any:
    try:
        return json.loads(source)
    except json.JSONDecodeError as exc:
        raise SchemaError(exc.msg, f"line {exc.lineno}, column {exc.colno}") from exc


def _check_keys(obj: Any, allowed: frozenset[str], required: frozenset[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise SchemaError("expected an object", where)
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise SchemaError(f"unknown keys {unknown}", where)
    missing = sorted(required - set(obj))
    if missing:
        raise SchemaError(f"missing keys {missing}", where)
    for key in ("name", "description"):
        if key in obj and not isinstance(obj[key], str):
            raise SchemaError(f"{key} must be a string", f"{where}.{key}")


def _load_native(document: Any) -> SchemaCatalog:
    _check_keys(document, _DOCUMENT_KEYS, _DOCUMENT_KEYS, "document")
    if not isinstance(document["version"], str):
        raise SchemaError("version must be a string", "version")
    if not isinstance(document["functions"], list):
        raise SchemaError("functions must be an array", "functions")

    specs = []
    for i, raw in enumerate(document["functions"]):
        where = f"functions[{i}]"
        _check_keys(raw, _FUNCTION_KEYS, _FUNCTION_KEYS, where)
        if not isinstance(raw["slots"], list):
            raise SchemaError("slots must be an array", f"{where}.slots")
        slots = tuple(
            _load_slot(slot, f"{where}.slots[{j}]") for j, slot in enumerate(raw["slots"])
        )
        try:
            specs.append(FunctionSpec(raw["name"], raw["description"], slots))
        except SchemaValidationError as exc:
            raise SchemaValidationError(f"{where}: {exc}") from exc
    return SchemaCatalog.from_specs(specs, version=document["version"])


def _load_slot(raw: Any, where: str) -> SlotSpec:
    _check_keys(raw, _SLOT_KEYS, _SLOT_REQUIRED_KEYS, where)
    try:
        kind = ValueKind(raw["kind"])
    except ValueError:
        raise SchemaError(f"unknown kind '{raw['kind']}'", f"{where}.kind") from None
    values = raw.get("values")
    if values is not None and not (
        isinstance(values, list) and all(isinstance(v, str) for v in values)
    ):
        raise SchemaError("values must be an array of strings", f"{where}.values")
    try:
        return SlotSpec(
            name=raw["name"],
            description=raw["description"],
            value_kind=kind,
            allowed_values=tuple(values) if values is not None else None,
            is_required=bool(raw.get("required", False)),
        )
    except SchemaValidationError as exc:
        raise SchemaValidationError(f"{where}: {exc}") from exc


def split_ontology_key(key: str) -> tuple[str, str]:
    """Split a MultiWOZ slot key ('hotel-book day', 'train-leaveAt') into domain and slot."""
    parts = [p for p in key.split("-") if p]
    if len(parts) < 2:
        raise SchemaError(f"not a domain-slot key: '{key}'", key)
    domain = parts[0].strip().lower()
    rest = [p.strip().lower() for p in parts[1:] if p.strip().lower() != "semi"]
    joined = " ".join(rest)
    if joined.startswith("book "):
        return domain, canonical_identifier(joined)
    return domain, joined.replace(" ", "")


def function_name_for_domain(domain: str) -> str:
    return f"find_{domain}"


def domain_for_function_name(name: str) -> str:
    return name.removeprefix("find_")


def _load_multiwoz_ontology(ontology: Any, descriptions: Mapping[str, Any]) -> SchemaCatalog:
    if not isinstance(ontology, dict):
        raise SchemaError("ontology must be an object of slot keys", "document")
    domain_docs = descriptions.get("domains", {})

    grouped: dict[str, list[str]] = {}
    for key in ontology:
        domain, slot = split_ontology_key(key)
        slots = grouped.setdefault(domain, [])
        if slot not in slots:
            slots.append(slot)

    specs = []
    for domain, slot_names in grouped.items():
        doc = domain_docs.get(domain)
        if doc is None:
            log.warning("No description for domain '%s'; skipping it", domain)
            continue
        slot_docs = doc.get("slots", {})
        slots = []
        for name in slot_names:
            slot_doc = slot_docs.get(name)
            if slot_doc is None:
                log.warning("No description for slot %s-%s; using free text", domain, name)
                slot_doc = {"description": name.replace("_", " "), "kind": "free_text"}
            values = slot_doc.get("values")
            slots.append(
                SlotSpec(
                    name=name,
                    description=slot_doc["description"],
                    value_kind=ValueKind(slot_doc.get("kind", "free_text")),
                    allowed_values=tuple(values) if values else None,
                    is_required=bool(slot_doc.get("required", False)),
                )
            )
        specs.append(
            FunctionSpec(function_name_for_domain(domain), doc["description"], tuple(slots))
        )
    return SchemaCatalog.from_specs(specs, version=str(descriptions.get("version", "multiwoz")))


def dump_catalog(catalog: SchemaCatalog) -> str:
    """Serialize a catalog as a native schema document."""
    functions = []
    for spec in catalog.functions.values():
        slots = []
        for slot in spec.slots:
            raw: dict[str, Any] = {
                "name": slot.name,
                "description": slot.description,
                "kind": slot.value_kind.value,
            }
            if slot.allowed_values is not None:
                raw["values"] = list(slot.allowed_values)
            if slot.is_required:
                raw["required"] = True
            slots.append(raw)
        functions.append({"name": spec.name, "description": spec.description, "slots": slots})
    document = {"version": catalog.version, "functions": functions}
    return json.dumps(document, ensure_ascii=False, indent=2) + "\n"


# -- rendering ----------------------------------------------------------------


def _slot_description(slot: SlotSpec) -> str:
    if slot.value_kind is ValueKind.TIME:
        return f"{slot.description} ({TIME_FORMAT_HINT})"
    return slot.description


def _sentence(text: str) -> str:
    text = text.strip()
    if text and text[-1] not in ".!?":
        text += "."
    return text


def render_spec_json(spec: FunctionSpec) -> str:
    """Render a spec as a JSON function specification.

    Keys are always emitted in the order name, description, parameters, and
    parameters follow slot order.
    """
    parameters: dict[str, dict[str, Any]] = {}
    for slot in spec.slots:
        entry: dict[str, Any] = {
            "description": _slot_description(slot),
            "type": _JSON_TYPES[slot.value_kind.value],
        }
        if slot.allowed_values is not None:
            entry["enum"] = list(slot.allowed_values)
        if slot.is_required:
            entry["required"] = True
        parameters[slot.name] = entry
    return json.dumps(
        {"name": spec.name, "description": spec.description, "parameters": parameters},
        ensure_ascii=False,
    )


def render_spec_text(spec: FunctionSpec) -> str:
    """Render a spec as a natural-language description, one sentence per slot."""
    lines = [f"Function {spec.name}: {_sentence(spec.description)}"]
    for slot in spec.slots:
        line = f"- {slot.name}: {_sentence(_slot_description(slot))}"
        if slot.value_kind is ValueKind.CATEGORICAL and slot.allowed_values:
            line += " Possible values: " + ", ".join(slot.allowed_values) + "."
        elif slot.value_kind is ValueKind.INTEGER:
            line += " The value is a number."
        elif slot.value_kind is ValueKind.BOOLEAN:
            line += " The value is yes or no."
        if slot.is_required:
            line += " Required."
        lines.append(line)
    return "\n".join(lines)


def render_spec(spec: FunctionSpec, rendering: str) -> str:
    """Dispatch to the JSON or text renderer."""
    if rendering == "text":
        return render_spec_text(spec)
    return render_spec_json(spec)


def render_brief_descriptions(catalog: SchemaCatalog) -> str:
    """One line per function with its name and one-sentence description."""
    return "\n".join(
        f"{spec.name}: {_sentence(spec.description)}" for spec in catalog.functions.values()
    )
