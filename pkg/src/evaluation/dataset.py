"""MultiWOZ ingestion: gold turns, delexicalized responses and user goals."""

from __future__ import annotations

import logging
import re
from collections import Counter
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from src.config.validators import canonical_identifier, validate_identifier
from src.constants import EMPTY_VALUES
from src.core.dialogue import DialogueState
from src.core.schema import SchemaCatalog, function_name_for_domain
from src.exceptions import DatasetError, FileAccessError, SchemaValidationError
from src.utils.filesystem import read_json, read_text

log = logging.getLogger(__name__)

SUPPORTED_VERSIONS = ("2.1", "2.2")

# Placeholder names for dataset slot labels that differ from ours
_PLACEHOLDER_ALIASES = {
    "addr": "address",
    "post": "postcode",
    "ref": "reference",
    "trainid": "id",
    "leave": "leaveat",
    "arrive": "arriveby",
    "dest": "destination",
    "depart": "departure",
    "fee": "price",
    "ticket": "price",
    "entrance_fee": "price",
    "car_type": "car",
}

_SPLIT_FILES = {"test": "testListFile.txt", "val": "valListFile.txt"}
_SPLIT_DIRS = {"test": "test", "val": "dev", "train": "train"}


@dataclass(frozen=True)
class GoldTurn:
    """One annotated turn: the user utterance and the state after it."""

    dialogue_id: str
    turn: int
    user: str
    state: DialogueState
    response: str
    active_domains: frozenset[str] = frozenset()
    turn_domain: str | None = None


@dataclass(frozen=True)
class GoldDialogue:
    dialogue_id: str
    turns: tuple[GoldTurn, ...]

    def __post_init__(self) -> None:
        for expected, turn in enumerate(self.turns):
            if turn.turn != expected:
                raise DatasetError(
                    f"{self.dialogue_id}: turn indices not contiguous at {turn.turn}"
                )


@dataclass(frozen=True)
class UserGoal:
    """Per-domain constraints and the information the user asked for."""

    dialogue_id: str
    constraints: Mapping[str, Mapping[str, str]] = field(default_factory=dict)
    requested: Mapping[str, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for slots in self.requested.values():
            for slot in slots:
                validate_identifier(slot, "requested slot")

    @property
    def domains(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.constraints) | set(self.requested)))


@dataclass
class _LoadStats:
    skipped: Counter[str] = field(default_factory=Counter)

    def skip(self, key: str) -> None:
        self.skipped[key] += 1

    def report(self, source: Path) -> None:
        if self.skipped:
            total = sum(self.skipped.values())
            keys = ", ".join(f"{k} x{n}" for k, n in sorted(self.skipped.items()))
            log.warning("Skipped %d unknown slot values in %s: %s", total, source, keys)


def placeholder_name(label: str) -> str:
    """Placeholder slot for a dataset span label ('Addr' -> 'address')."""
    slot = canonical_identifier(label.split("-")[-1])
    return _PLACEHOLDER_ALIASES.get(slot, slot)


def _canonical_slot(raw: str) -> str:
    slot = canonical_identifier(raw)
    if slot.startswith("book") and not slot.startswith("book_"):
        slot = "book_" + slot[len("book") :]
    return slot


def _is_filled(value: Any) -> bool:
    return isinstance(value, str) and value.strip().lower() not in EMPTY_VALUES


class _StateBuilder:
    """Maps dataset domain/slot labels into catalog terms and filters unknowns."""

    def __init__(self, catalog: SchemaCatalog | None, stats: _LoadStats) -> None:
        self._catalog = catalog
        self._stats = stats

    def add(self, state: dict[str, dict[str, str]], domain: str, slot: str, value: str) -> None:
        function = function_name_for_domain(domain.lower())
        if self._catalog is not None:
            if function not in self._catalog:
                return
            if self._catalog.get(function).slot(slot) is None:
                self._stats.skip(f"{domain}-{slot}")
                return
        state.setdefault(function, {})[slot] = value.strip()


def load_multiwoz(
    path: Path,
    version: str = "2.1",
    *,
    catalog: SchemaCatalog | None = None,
    split: str = "test",
) -> tuple[list[GoldDialogue], list[UserGoal]]:
    """Load one split of MultiWOZ as gold dialogues plus user goals.

    Version 2.1 reads ``data.json`` with its split list file; 2.2 reads the
    ``<split>/dialogues_*.json`` shards. Book and search slots are merged into
    one function per domain. With a catalog, domains and slots it does not
    declare are skipped (slots with a warning and a count).

    Raises:
        DatasetError: If the files are missing or structurally invalid.
    """
    if version not in SUPPORTED_VERSIONS:
        raise DatasetError(f"Unsupported MultiWOZ version {version}")
    stats = _LoadStats()
    try:
        if version == "2.1":
            result = _load_21(path, catalog, split, stats)
        else:
            result = _load_22(path, catalog, split, stats)
    except FileAccessError as exc:
        raise DatasetError(str(exc)) from exc
    except (KeyError, IndexError, TypeError, AttributeError, SchemaValidationError) as exc:
        raise DatasetError(f"Malformed MultiWOZ {version} data under {path}: {exc!r}") from exc
    stats.report(path)
    log.info("[OK] Loaded %d dialogues from MultiWOZ %s %s", len(result[0]), version, split)
    return result


# -- MultiWOZ 2.1 -------------------------------------------------------------


def _load_21(
    path: Path, catalog: SchemaCatalog | None, split: str, stats: _LoadStats
) -> tuple[list[GoldDialogue], list[UserGoal]]:
    data_file = path / "data.json" if path.is_dir() else path
    root = data_file.parent
    data = read_json(data_file)
    if not isinstance(data, dict):
        raise DatasetError(f"{data_file} must map dialogue ids to dialogues")

    list_file = root / _SPLIT_FILES.get(split, "")
    if split in _SPLIT_FILES and list_file.is_file():
        ids = [line.strip() for line in read_text(list_file).splitlines() if line.strip()]
    else:
        log.warning("No %s list file next to %s; using every dialogue", split, data_file)
        ids = list(data)

    builder = _StateBuilder(catalog, stats)
    dialogues, goals = [], []
    for dialogue_id in ids:
        if dialogue_id not in data:
            raise DatasetError(f"Dialogue {dialogue_id} listed in {list_file.name} is missing")
        raw = data[dialogue_id]
        dialogues.append(_dialogue_21(dialogue_id, raw["log"], builder))
        goals.append(_goal_21(dialogue_id, raw.get("goal", {}), catalog))
    return dialogues, goals


def _state_21(metadata: Mapping[str, Any], builder: _StateBuilder) -> dict[str, dict[str, str]]:
    state: dict[str, dict[str, str]] = {}
    for domain, parts in metadata.items():
        for slot, value in parts.get("semi", {}).items():
            if _is_filled(value):
                builder.add(state, domain, _canonical_slot(slot), value)
        for slot, value in parts.get("book", {}).items():
            if slot != "booked" and _is_filled(value):
                builder.add(state, domain, "book_" + canonical_identifier(slot), value)
    return state


def _dialogue_21(dialogue_id: str, log_: list[Any], builder: _StateBuilder) -> GoldDialogue:
    if len(log_) % 2:
        raise DatasetError(f"{dialogue_id}: log has an unanswered user turn")
    turns = []
    previous: dict[str, dict[str, str]] = {}
    turn_domain: str | None = None
    for index in range(0, len(log_), 2):
        user, system = log_[index], log_[index + 1]
        state = _state_21(system["metadata"], builder)
        changed = sorted(d for d in state if state[d] != previous.get(d))
        if changed:
            turn_domain = changed[0] if len(changed) == 1 else turn_domain or changed[0]
        turns.append(
            GoldTurn(
                dialogue_id=dialogue_id,
                turn=index // 2,
                user=user["text"].strip(),
                state=DialogueState(state),
                response=delexicalize_words(system["text"], system.get("span_info", [])),
                active_domains=frozenset(state) | ({turn_domain} if turn_domain else set()),
                turn_domain=turn_domain,
            )
        )
        previous = state
    return GoldDialogue(dialogue_id, tuple(turns))


def delexicalize_words(text: str, spans: Sequence[Sequence[Any]]) -> str:
    """Replace word spans ``[act, slot, value, start, end]`` with ``[value_slot]``."""
    words = text.split()
    replacements = {}
    for span in spans:
        if len(span) < 5:
            continue
        start, end = int(span[3]), int(span[4])
        if 0 <= start <= end < len(words) and span[1].lower() != "none":
            replacements[start] = (end, f"[value_{placeholder_name(span[1])}]")
    out, i = [], 0
    while i < len(words):
        if i in replacements:
            end, token = replacements[i]
            out.append(token)
            i = end + 1
        else:
            out.append(words[i])
            i += 1
    return " ".join(out)


def _goal_21(dialogue_id: str, goal: Mapping[str, Any], catalog: SchemaCatalog | None) -> UserGoal:
    constraints: dict[str, dict[str, str]] = {}
    requested: dict[str, frozenset[str]] = {}
    for domain, spec in goal.items():
        if not isinstance(spec, dict) or not spec:
            continue
        function = function_name_for_domain(domain)
        if catalog is not None and function not in catalog:
            continue
        constraints[function] = {
            _canonical_slot(slot): str(value) for slot, value in spec.get("info", {}).items()
        }
        wanted = {placeholder_name(slot) for slot in spec.get("reqt", [])}
        if spec.get("book"):
            wanted.add("reference")
        requested[function] = frozenset(wanted)
    return UserGoal(dialogue_id, constraints, requested)


# -- MultiWOZ 2.2 -------------------------------------------------------------


def _load_22(
    path: Path, catalog: SchemaCatalog | None, split: str, stats: _LoadStats
) -> tuple[list[GoldDialogue], list[UserGoal]]:
    split_dir = path / _SPLIT_DIRS.get(split, split)
    if not split_dir.is_dir():
        split_dir = path
    shards = sorted(split_dir.glob("dialogues_*.json"))
    if not shards:
        raise DatasetError(f"No dialogues_*.json shards under {split_dir}")

    builder = _StateBuilder(catalog, stats)
    dialogues, goals = [], []
    for shard in shards:
        for raw in read_json(shard):
            dialogue, goal = _dialogue_22(raw, builder, catalog)
            dialogues.append(dialogue)
            goals.append(goal)
    return dialogues, goals


def _dialogue_22(
    raw: Mapping[str, Any], builder: _StateBuilder, catalog: SchemaCatalog | None
) -> tuple[GoldDialogue, UserGoal]:
    dialogue_id = raw["dialogue_id"]
    raw_turns = raw["turns"]
    if len(raw_turns) % 2:
        raise DatasetError(f"{dialogue_id}: turns do not alternate user/system")

    turns = []
    requested: dict[str, set[str]] = {}
    turn_domain: str | None = None
    state: dict[str, dict[str, str]] = {}
    for index in range(0, len(raw_turns), 2):
        user, system = raw_turns[index], raw_turns[index + 1]
        if user["speaker"] != "USER" or system["speaker"] != "SYSTEM":
            raise DatasetError(f"{dialogue_id}: unexpected speaker order at turn {index // 2}")
        state = {}
        active_now = []
        for frame in user["frames"]:
            service = frame["service"]
            frame_state = frame.get("state", {})
            for key, values in frame_state.get("slot_values", {}).items():
                if values and _is_filled(values[0]):
                    builder.add(state, service, _canonical_slot(key.split("-", 1)[-1]), values[0])
            function = function_name_for_domain(service)
            known = catalog is None or function in catalog
            if known and frame_state.get("active_intent", "NONE") != "NONE":
                active_now.append(function)
            for key in frame_state.get("requested_slots", []):
                requested.setdefault(function_name_for_domain(service), set()).add(
                    placeholder_name(key)
                )
        if active_now:
            turn_domain = active_now[0]
        spans = [slot for frame in system.get("frames", []) for slot in frame.get("slots", [])]
        turns.append(
            GoldTurn(
                dialogue_id=dialogue_id,
                turn=index // 2,
                user=user["utterance"].strip(),
                state=DialogueState(state),
                response=delexicalize_chars(system["utterance"], spans),
                active_domains=frozenset(state) | ({turn_domain} if turn_domain else set()),
                turn_domain=turn_domain,
            )
        )

    domains = set(state) | set(requested)
    if catalog is not None:
        domains = {d for d in domains if d in catalog}
    goal = UserGoal(
        dialogue_id,
        constraints={d: dict(state.get(d, {})) for d in domains},
        requested={d: frozenset(requested.get(d, set())) for d in domains},
    )
    return GoldDialogue(dialogue_id, tuple(turns)), goal


def delexicalize_chars(text: str, spans: Sequence[Mapping[str, Any]]) -> str:
    """Replace character spans ``{slot, start, exclusive_end}`` with ``[value_slot]``."""
    usable = sorted(
        (s for s in spans if "start" in s and "exclusive_end" in s),
        key=lambda s: int(s["start"]),
        reverse=True,
    )
    floor = len(text)
    for span in usable:
        start, end = int(span["start"]), int(span["exclusive_end"])
        if 0 <= start < end <= floor:
            text = text[:start] + f"[value_{placeholder_name(span['slot'])}]" + text[end:]
            floor = start
    return re.sub(r"\s+", " ", text).strip()
