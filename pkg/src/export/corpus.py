"""Loading dialogue corpora into the canonical function-calling form."""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from src.config.validators import canonical_identifier
from src.core.dialogue import AssistantOutput, DialogueContext, FunctionCall, Turn
from src.core.schema import (
    FunctionSpec,
    SchemaCatalog,
    SlotSpec,
    ValueKind,
    function_name_for_domain,
)
from src.evaluation.dataset import GoldDialogue
from src.exceptions import ExportError, FileAccessError, TrackerError
from src.utils.filesystem import read_json

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CorpusDialogue:
    """A dialogue whose assistant turns carry the gold function calls."""

    corpus: str
    dialogue_id: str
    context: DialogueContext

    @property
    def domains(self) -> tuple[str, ...]:
        """Invoked functions in order of first use."""
        seen: dict[str, None] = {}
        for turn in self.context.turns:
            if turn.assistant is not None and turn.assistant.call is not None:
                seen.setdefault(turn.assistant.call.function, None)
        return tuple(seen)

    @property
    def calls(self) -> list[FunctionCall]:
        return [
            turn.assistant.call
            for turn in self.context.turns
            if turn.assistant is not None and turn.assistant.call is not None
        ]

    def to_dict(self) -> dict[str, Any]:
        return {
            "dialogue_id": self.dialogue_id,
            "domains": list(self.domains),
            "turns": self.context.to_list(),
        }


def load_native_corpus(path: Path, corpus: str | None = None) -> list[CorpusDialogue]:
    """Read the canonical serialization: a JSON array of
    ``{dialogue_id, domains, turns: [{user, assistant: {call?, response}}]}``.

    Raises:
        ExportError: If the file is unreadable or a dialogue is malformed.
    """
    name = corpus or path.stem
    try:
        raw = read_json(path)
    except FileAccessError as exc:
        raise ExportError(str(exc)) from exc
    if not isinstance(raw, list):
        raise ExportError(f"{path}: expected a JSON array of dialogues")

    dialogues = []
    for i, item in enumerate(raw):
        try:
            dialogue = CorpusDialogue(
                corpus=name,
                dialogue_id=str(item["dialogue_id"]),
                context=DialogueContext.from_list(item["turns"]),
            )
        except (KeyError, TypeError, ValueError, TrackerError) as exc:
            raise ExportError(f"{path}: dialogue {i} is malformed: {exc}") from exc
        declared = item.get("domains")
        if declared is not None and set(declared) != set(dialogue.domains):
            log.warning(
                "%s: %s declares domains %s but calls %s",
                path,
                dialogue.dialogue_id,
                sorted(declared),
                list(dialogue.domains),
            )
        dialogues.append(dialogue)
    log.info("Loaded %d dialogues from %s", len(dialogues), path)
    return dialogues


def from_gold_dialogue(dialogue: GoldDialogue, corpus: str = "multiwoz") -> CorpusDialogue:
    """Convert gold states into per-turn calls.

    Each turn with a known turn domain carries that domain's full current
    slot set, so replaying the calls through ``update_state`` reproduces
    the gold state of every domain as it is last touched.
    """
    turns = []
    for gold in dialogue.turns:
        call = None
        domain = gold.turn_domain
        if domain is not None:
            call = FunctionCall(domain, gold.state.per_domain.get(domain, {}))
        response = gold.response
        assistant = AssistantOutput(call, response) if call is not None or response else None
        turns.append(Turn(gold.user, assistant))
    return CorpusDialogue(corpus, dialogue.dialogue_id, DialogueContext(tuple(turns)))


def _service_function(service: str) -> str:
    return function_name_for_domain(canonical_identifier(service))


def _sgd_slot(raw: Mapping[str, Any], required: bool) -> SlotSpec:
    values = tuple(raw.get("possible_values", ()))
    categorical = bool(raw.get("is_categorical")) and bool(values)
    return SlotSpec(
        name=canonical_identifier(raw["name"]),
        description=raw.get("description", ""),
        value_kind=ValueKind.CATEGORICAL if categorical else ValueKind.FREE_TEXT,
        allowed_values=values if categorical else None,
        is_required=required,
    )


def sgd_schema_to_catalog(
    schema: Sequence[Mapping[str, Any]], version: str = "sgd"
) -> SchemaCatalog:
    """Build a catalog from an SGD ``schema.json`` document.

    Categorical slots keep their ``possible_values``; slots required by any
    intent are marked required.

    Raises:
        ExportError: If a service entry is malformed.
    """
    specs = []
    for i, service in enumerate(schema):
        try:
            required = {
                slot
                for intent in service.get("intents", ())
                for slot in intent.get("required_slots", ())
            }
            slots = tuple(_sgd_slot(slot, slot["name"] in required) for slot in service["slots"])
            specs.append(
                FunctionSpec(
                    name=_service_function(service["service_name"]),
                    description=service.get("description", ""),
                    slots=slots,
                )
            )
        except (KeyError, TypeError, AttributeError, TrackerError) as exc:
            raise ExportError(f"SGD schema entry {i} is malformed: {exc}") from exc
    return SchemaCatalog.from_specs(specs, version=version)


def _sgd_files(path: Path) -> list[Path]:
    if path.is_dir():
        return sorted(p for p in path.glob("dialogues_*.json"))
    return [path]


def _frame_values(frame: Mapping[str, Any]) -> dict[str, str]:
    values = frame.get("state", {}).get("slot_values", {})
    return {
        canonical_identifier(slot): str(options[0])
        for slot, options in values.items()
        if options
    }


def _sgd_call(
    frames: Iterable[Mapping[str, Any]], previous: dict[str, dict[str, str]]
) -> FunctionCall | None:
    """The call for a user turn: the first active frame whose slots changed,
    else the first active frame."""
    active = [f for f in frames if f.get("state", {}).get("active_intent", "NONE") != "NONE"]
    chosen = None
    for frame in active:
        function = _service_function(frame["service"])
        values = _frame_values(frame)
        if values != previous.get(function, {}):
            chosen = (function, values)
            break
    if chosen is None and active:
        chosen = (_service_function(active[0]["service"]), _frame_values(active[0]))
    for frame in active:
        previous[_service_function(frame["service"])] = _frame_values(frame)
    if chosen is None:
        return None
    return FunctionCall(*chosen)


def load_sgd_corpus(path: Path, corpus: str = "sgd") -> list[CorpusDialogue]:
    """Read SGD-style dialogue files (a directory of ``dialogues_*.json`` or one file).

    Services map to ``find_<service>`` functions; each user turn's call is the
    state of its active intent.

    Raises:
        ExportError: If a file is unreadable or structurally wrong.
    """
    dialogues = []
    for file in _sgd_files(path):
        try:
            raw = read_json(file)
        except FileAccessError as exc:
            raise ExportError(str(exc)) from exc
        if not isinstance(raw, list):
            raise ExportError(f"{file}: expected a JSON array of dialogues")
        for item in raw:
            try:
                dialogues.append(_sgd_dialogue(item, corpus))
            except (KeyError, TypeError, AttributeError, IndexError, TrackerError) as exc:
                raise ExportError(f"{file}: malformed dialogue: {exc}") from exc
    log.info("Loaded %d SGD dialogues from %s", len(dialogues), path)
    return dialogues


def _sgd_dialogue(item: Mapping[str, Any], corpus: str) -> CorpusDialogue:
    turns: list[Turn] = []
    previous: dict[str, dict[str, str]] = {}
    user: str | None = None
    call: FunctionCall | None = None
    for raw in item["turns"]:
        if raw["speaker"] == "USER":
            if user is not None:
                turns.append(Turn(user, AssistantOutput(call, "") if call else None))
            user = raw["utterance"]
            call = _sgd_call(raw.get("frames", ()), previous)
        elif user is not None:
            response = raw.get("utterance", "")
            assistant = AssistantOutput(call, response) if call or response else None
            turns.append(Turn(user, assistant))
            user, call = None, None
    if user is not None:
        turns.append(Turn(user, AssistantOutput(call, "") if call else None))
    return CorpusDialogue(corpus, str(item["dialogue_id"]), DialogueContext(tuple(turns)))
