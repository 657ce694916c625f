"""Tests for report assembly."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import pytest

from src.core.schema import SchemaCatalog
from src.evaluation.dataset import GoldDialogue, UserGoal, load_multiwoz
from src.evaluation.report import DomainScore, EvalReport, build_report, load_manifest
from src.exceptions import CoverageError, MetricError
from src.utils.filesystem import write_jsonl


@pytest.fixture
def gold(
    multiwoz21_dir: Path, catalog: SchemaCatalog
) -> tuple[list[GoldDialogue], list[UserGoal]]:
    return load_multiwoz(multiwoz21_dir, "2.1", catalog=catalog)


def _perfect(dialogues: list[GoldDialogue], **extra: Any) -> list[dict[str, Any]]:
    return [
        {
            "dialogue_id": turn.dialogue_id,
            "turn": turn.turn,
            "selected": turn.turn_domain,
            "oracle": False,
            "state": turn.state.to_dict(),
            "response": turn.response,
            "units": {"selection": 10, "arguments": 30},
            **extra,
        }
        for dialogue in dialogues
        for turn in dialogue.turns
    ]


class TestBuildReport:
    """Tests for build_report."""

    def test_perfect_manifest(
        self, gold: tuple[list[GoldDialogue], list[UserGoal]], catalog: SchemaCatalog
    ) -> None:
        dialogues, goals = gold
        report = build_report(_perfect(dialogues), dialogues, goals, catalog)
        assert report.overall_jga == 1.0
        assert report.overall_f1 == 1.0
        assert report.average_jga == 1.0
        assert report.selection_accuracy == 1.0
        assert report.success == pytest.approx(0.8)
        assert report.n_dialogues == 10
        assert report.n_turns == 20
        assert {name: s.turns for name, s in report.per_domain.items()} == {
            "find_attraction": 4,
            "find_hotel": 5,
            "find_restaurant": 6,
            "find_taxi": 3,
            "find_train": 5,
        }
        assert dict(report.units) == {"selection": 200, "arguments": 600, "total": 800}

    def test_one_wrong_turn(
        self, gold: tuple[list[GoldDialogue], list[UserGoal]], catalog: SchemaCatalog
    ) -> None:
        dialogues, _ = gold
        records = _perfect(dialogues)
        sng05_last = next(
            r for r in records if r["dialogue_id"] == "SNG05.json" and r["turn"] == 1
        )
        sng05_last["state"] = {"find_taxi": {"leaveat": "10:15", "destination": "train station"}}
        report = build_report(records, dialogues, [], catalog)
        assert report.overall_jga == pytest.approx(19 / 20)
        assert report.per_domain["find_taxi"].jga == pytest.approx(2 / 3)
        assert report.per_domain["find_hotel"].jga == 1.0
        assert report.average_jga == pytest.approx((4 + 2 / 3) / 5)
        assert report.success is None

    def test_missing_turns_raise_coverage_error(
        self, gold: tuple[list[GoldDialogue], list[UserGoal]], catalog: SchemaCatalog
    ) -> None:
        dialogues, goals = gold
        dropped = {"SNG03.json", "MUL07.json"}
        records = [r for r in _perfect(dialogues) if r["dialogue_id"] not in dropped]
        with pytest.raises(CoverageError) as excinfo:
            build_report(records, dialogues, goals, catalog)
        assert excinfo.value.missing == ["MUL07.json", "SNG03.json"]

    def test_extra_records_ignored(
        self, gold: tuple[list[GoldDialogue], list[UserGoal]], catalog: SchemaCatalog
    ) -> None:
        dialogues, goals = gold
        records = _perfect(dialogues) + [{"dialogue_id": "ZZZ", "turn": 0, "state": {}}]
        assert build_report(records, dialogues, goals, catalog).overall_jga == 1.0

    def test_inactive_domains_are_blank(
        self, gold: tuple[list[GoldDialogue], list[UserGoal]], catalog: SchemaCatalog
    ) -> None:
        dialogues = gold[0][:1]
        report = build_report(_perfect(dialogues), dialogues, [], catalog)
        assert report.per_domain["find_restaurant"].jga == 1.0
        assert report.per_domain["find_hotel"].jga is None
        assert report.per_domain["find_hotel"].turns == 0
        assert report.average_jga == 1.0

    def test_oracle_run_has_no_selection_accuracy(
        self, gold: tuple[list[GoldDialogue], list[UserGoal]], catalog: SchemaCatalog
    ) -> None:
        dialogues, goals = gold
        report = build_report(_perfect(dialogues, oracle=True), dialogues, goals, catalog)
        assert report.selection_accuracy is None

    def test_all_turns_per_domain(
        self, gold: tuple[list[GoldDialogue], list[UserGoal]], catalog: SchemaCatalog
    ) -> None:
        dialogues, goals = gold
        report = build_report(_perfect(dialogues), dialogues, goals, catalog, all_turns=True)
        assert all(score.turns == 20 for score in report.per_domain.values())
        assert report.average_jga == 1.0

    def test_no_gold_turns(self, catalog: SchemaCatalog) -> None:
        with pytest.raises(MetricError):
            build_report([], [], [], catalog)


class TestRendering:
    """Tests for report serialization."""

    def _report(self) -> EvalReport:
        return EvalReport(
            per_domain={
                "find_train": DomainScore(0.5, 0.75, 4),
                "find_hotel": DomainScore(None, None, 0),
            },
            average_jga=0.5,
            overall_jga=0.123456,
            overall_f1=0.8,
            success=None,
            selection_accuracy=1.0,
            n_dialogues=2,
            n_turns=4,
            units={"total": 10, "selection": 4, "arguments": 6},
        )

    def test_json(self) -> None:
        text = self._report().to_json()
        assert text.endswith("}\n")
        data = json.loads(text)
        assert data["overall_jga"] == 0.1235
        assert data["success"] is None
        assert list(data["per_domain"]) == ["find_hotel", "find_train"]
        assert data["per_domain"]["find_hotel"] == {"jga": None, "f1": None, "turns": 0}

    def test_table(self) -> None:
        lines = self._report().render_table().splitlines()
        assert lines[0].split() == ["hotel", "train", "Average", "Overall"]
        assert lines[1].split() == ["JGA", "-", "50.00", "50.00", "12.35"]
        assert lines[2].split() == ["F1", "-", "75.00", "-", "80.00"]
        assert lines[3].split() == ["Turns", "0", "4", "4"]
        assert "Success:        -" in lines
        assert "FS accuracy:    100.00" in lines
        assert lines[-1] == "Prompt units:   arguments=6, selection=4, total=10"


class TestLoadManifest:
    """Tests for load_manifest."""

    def test_reads_records(self, tmp_path: Path) -> None:
        path = tmp_path / "manifest.jsonl"
        write_jsonl(path, [{"dialogue_id": "A", "turn": 0, "state": {}}])
        assert load_manifest(path) == [{"dialogue_id": "A", "turn": 0, "state": {}}]

    def test_rejects_incomplete_records(self, tmp_path: Path) -> None:
        path = tmp_path / "manifest.jsonl"
        write_jsonl(path, [{"dialogue_id": "A", "turn": 0}])
        with pytest.raises(MetricError, match=":1"):
            load_manifest(path)
