"""Assembling run manifests into evaluation reports."""

from __future__ import annotations

import json
import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from src.core.dialogue import DialogueState
from src.core.schema import SchemaCatalog, domain_for_function_name
from src.evaluation.dataset import GoldDialogue, GoldTurn, UserGoal
from src.evaluation.metrics import (
    joint_goal_accuracy,
    selection_accuracy,
    slot_f1,
    success_rate,
)
from src.exceptions import CoverageError, MetricError
from src.parsing.normalize import make_normalizer
from src.utils.filesystem import iter_jsonl

log = logging.getLogger(__name__)

_RATIO_DIGITS = 4


@dataclass(frozen=True)
class DomainScore:
    jga: float | None
    f1: float | None
    turns: int

    def to_dict(self) -> dict[str, Any]:
        return {"jga": _round(self.jga), "f1": _round(self.f1), "turns": self.turns}


@dataclass(frozen=True)
class EvalReport:
    """Every metric of one run, ready for JSON or a fixed-width table."""

    per_domain: Mapping[str, DomainScore]
    average_jga: float | None
    overall_jga: float
    overall_f1: float
    success: float | None
    selection_accuracy: float | None
    n_dialogues: int
    n_turns: int
    units: Mapping[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "per_domain": {
                name: score.to_dict() for name, score in sorted(self.per_domain.items())
            },
            "average_jga": _round(self.average_jga),
            "overall_jga": _round(self.overall_jga),
            "overall_f1": _round(self.overall_f1),
            "success": _round(self.success),
            "selection_accuracy": _round(self.selection_accuracy),
            "n_dialogues": self.n_dialogues,
            "n_turns": self.n_turns,
            "units": dict(sorted(self.units.items())),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def render_table(self) -> str:
        """Domain columns with JGA and F1 rows, then the run-level figures."""
        names = sorted(self.per_domain)
        headers = [domain_for_function_name(name) for name in names] + ["Average", "Overall"]
        width = max(10, *(len(h) + 2 for h in headers))
        label = 8

        def row(title: str, values: Sequence[float | None]) -> str:
            return title.ljust(label) + "".join(_cell(v).rjust(width) for v in values)

        jga = [self.per_domain[n].jga for n in names]
        lines = [
            "".ljust(label) + "".join(h.rjust(width) for h in headers),
            row("JGA", jga + [self.average_jga, self.overall_jga]),
            row("F1", [self.per_domain[n].f1 for n in names] + [None, self.overall_f1]),
            "Turns".ljust(label)
            + "".join(str(self.per_domain[n].turns).rjust(width) for n in names)
            + "".rjust(width)
            + str(self.n_turns).rjust(width),
            "",
            f"Success:        {_cell(self.success)}",
            f"FS accuracy:    {_cell(self.selection_accuracy)}",
            f"Dialogues:      {self.n_dialogues}",
        ]
        if self.units:
            units = ", ".join(f"{k}={v}" for k, v in sorted(self.units.items()))
            lines.append(f"Prompt units:   {units}")
        return "\n".join(lines) + "\n"


def _round(value: float | None) -> float | None:
    return None if value is None else round(value, _RATIO_DIGITS)


def _cell(value: float | None) -> str:
    return "-" if value is None else f"{value * 100:.2f}"


def load_manifest(path: Path) -> list[dict[str, Any]]:
    """Read a run manifest written by ``evaluate``.

    Raises:
        FileAccessError: If the file cannot be read or holds invalid JSON.
        MetricError: If a record lacks its dialogue id, turn or state.
    """
    records = []
    for lineno, record in iter_jsonl(path):
        if not isinstance(record, dict) or not {"dialogue_id", "turn", "state"} <= set(record):
            raise MetricError(f"{path}:{lineno}: not a manifest record")
        records.append(record)
    return records


def _index(records: Sequence[Mapping[str, Any]]) -> dict[tuple[str, int], Mapping[str, Any]]:
    index: dict[tuple[str, int], Mapping[str, Any]] = {}
    for record in records:
        key = (str(record["dialogue_id"]), int(record["turn"]))
        if key in index:
            log.warning("Duplicate manifest record for %s turn %d; keeping the last", *key)
        index[key] = record
    return index


def _covered(
    index: Mapping[tuple[str, int], Mapping[str, Any]], golds: Sequence[GoldDialogue]
) -> list[GoldTurn]:
    missing = sorted(
        {
            turn.dialogue_id
            for dialogue in golds
            for turn in dialogue.turns
            if (turn.dialogue_id, turn.turn) not in index
        }
    )
    if missing:
        raise CoverageError(missing)
    known = {(t.dialogue_id, t.turn) for d in golds for t in d.turns}
    extra = len(set(index) - known)
    if extra:
        log.warning("Ignoring %d manifest records with no gold turn", extra)
    return [turn for dialogue in golds for turn in dialogue.turns]


def _units(records: Sequence[Mapping[str, Any]]) -> dict[str, int]:
    totals = {"selection": 0, "arguments": 0, "total": 0}
    for record in records:
        units = record.get("units") or {}
        totals["selection"] += int(units.get("selection", 0))
        totals["arguments"] += int(units.get("arguments", 0))
    totals["total"] = totals["selection"] + totals["arguments"]
    return totals


def build_report(
    records: Sequence[Mapping[str, Any]],
    golds: Sequence[GoldDialogue],
    goals: Sequence[UserGoal],
    catalog: SchemaCatalog,
    *,
    all_turns: bool = False,
) -> EvalReport:
    """Compute every metric for a run.

    Per-domain columns cover the catalog's functions; a domain never active
    in gold reports ``None`` and is left out of the average. Success is
    ``None`` when no goals are given.

    Raises:
        CoverageError: If any gold turn has no manifest record.
        MetricError: If there are no gold turns at all.
    """
    index = _index(records)
    turns = _covered(index, golds)
    if not turns:
        raise MetricError("No gold turns to evaluate")

    ordered = [index[(t.dialogue_id, t.turn)] for t in turns]
    preds = [DialogueState.from_dict(r["state"]) for r in ordered]
    normalizer = make_normalizer(catalog)

    per_domain: dict[str, DomainScore] = {}
    for name in catalog.names:
        active = sum(1 for t in turns if name in t.active_domains)
        if active == 0 and not all_turns:
            per_domain[name] = DomainScore(jga=None, f1=None, turns=0)
            continue
        per_domain[name] = DomainScore(
            jga=joint_goal_accuracy(preds, turns, name, normalizer=normalizer, all_turns=all_turns),
            f1=slot_f1(preds, turns, name, normalizer=normalizer, all_turns=all_turns),
            turns=len(turns) if all_turns else active,
        )
    scored = [s.jga for s in per_domain.values() if s.jga is not None]

    oracle_run = all(bool(r.get("oracle")) for r in ordered)
    fs_accuracy = (
        None if oracle_run else selection_accuracy([r.get("selected") for r in ordered], turns)
    )

    success = None
    if goals:
        responses: dict[str, list[str]] = {}
        for record in ordered:
            responses.setdefault(str(record["dialogue_id"]), []).append(
                str(record.get("response") or "")
            )
        success = success_rate(responses, goals)

    return EvalReport(
        per_domain=per_domain,
        average_jga=sum(scored) / len(scored) if scored else None,
        overall_jga=joint_goal_accuracy(preds, turns, normalizer=normalizer),
        overall_f1=slot_f1(preds, turns, normalizer=normalizer),
        success=success,
        selection_accuracy=fs_accuracy,
        n_dialogues=len(golds),
        n_turns=len(turns),
        units=_units(ordered),
    )
