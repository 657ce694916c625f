"""Tests for MultiWOZ loading."""

from __future__ import annotations

import json
import shutil
from pathlib import Path

import pytest

from src.core.dialogue import DialogueState
from src.core.schema import SchemaCatalog
from src.evaluation.dataset import (
    GoldDialogue,
    GoldTurn,
    UserGoal,
    delexicalize_chars,
    delexicalize_words,
    load_multiwoz,
    placeholder_name,
)
from src.exceptions import DatasetError


@pytest.fixture
def loaded21(
    multiwoz21_dir: Path, catalog: SchemaCatalog
) -> tuple[list[GoldDialogue], list[UserGoal]]:
    return load_multiwoz(multiwoz21_dir, "2.1", catalog=catalog)


class TestMultiwoz21:
    """Tests for the 2.1 loader."""

    def test_listed_dialogues_only(
        self, loaded21: tuple[list[GoldDialogue], list[UserGoal]]
    ) -> None:
        dialogues, goals = loaded21
        assert [d.dialogue_id for d in dialogues] == [
            "SNG01.json",
            "SNG02.json",
            "SNG03.json",
            "SNG04.json",
            "SNG05.json",
            "MUL06.json",
            "MUL07.json",
            "SNG08.json",
            "SNG09.json",
            "SNG10.json",
        ]
        assert len(goals) == 10
        assert sum(len(d.turns) for d in dialogues) == 20
        assert sum(len(t.state) for d in dialogues for t in d.turns) == 63

    def test_state_and_response(
        self, loaded21: tuple[list[GoldDialogue], list[UserGoal]]
    ) -> None:
        first = loaded21[0][0].turns[0]
        assert first.user == "I want a cheap restaurant in the centre."
        assert first.state.to_dict() == {
            "find_restaurant": {"area": "centre", "pricerange": "cheap"}
        }
        assert first.response == "[value_name] is a cheap place in the centre ."
        assert first.turn_domain == "find_restaurant"

    def test_book_slots_merged(self, loaded21: tuple[list[GoldDialogue], list[UserGoal]]) -> None:
        booked = loaded21[0][1].turns[1].state.to_dict()["find_hotel"]
        assert booked == {
            "area": "north",
            "book_day": "friday",
            "book_people": "2",
            "book_stay": "3",
            "parking": "yes",
            "type": "guesthouse",
        }

    def test_dontcare_is_a_value(self, loaded21: tuple[list[GoldDialogue], list[UserGoal]]) -> None:
        sng09 = loaded21[0][8]
        assert sng09.turns[0].state.to_dict() == {
            "find_hotel": {"area": "dontcare", "type": "guesthouse"}
        }

    def test_turn_domain_follows_changes(
        self, loaded21: tuple[list[GoldDialogue], list[UserGoal]]
    ) -> None:
        mul06 = loaded21[0][5]
        assert [t.turn_domain for t in mul06.turns] == [
            "find_restaurant",
            "find_hotel",
            "find_hotel",
        ]
        assert mul06.turns[0].active_domains == frozenset({"find_restaurant"})
        assert mul06.turns[1].active_domains == frozenset({"find_restaurant", "find_hotel"})
        sng01 = loaded21[0][0]
        assert sng01.turns[1].turn_domain == "find_restaurant"

    def test_multi_span_delexicalization(
        self, loaded21: tuple[list[GoldDialogue], list[UserGoal]]
    ) -> None:
        sng05 = loaded21[0][4]
        assert sng05.turns[1].response == (
            "Booked a [value_car] , contact number [value_phone] ."
        )

    def test_goals(self, loaded21: tuple[list[GoldDialogue], list[UserGoal]]) -> None:
        goals = {g.dialogue_id: g for g in loaded21[1]}
        sng01 = goals["SNG01.json"]
        assert dict(sng01.constraints) == {
            "find_restaurant": {"pricerange": "cheap", "area": "centre"}
        }
        assert dict(sng01.requested) == {"find_restaurant": frozenset({"phone"})}
        assert goals["SNG02.json"].requested["find_hotel"] == frozenset({"reference"})
        assert goals["SNG03.json"].requested["find_train"] == frozenset({"id"})
        assert goals["SNG03.json"].constraints["find_train"]["leaveat"] == "09:00"
        assert goals["SNG04.json"].requested["find_attraction"] == frozenset({"price"})
        assert goals["SNG05.json"].requested["find_taxi"] == frozenset({"car", "phone"})
        assert goals["MUL06.json"].domains == ("find_hotel", "find_restaurant")

    def test_without_list_file_loads_everything(
        self, multiwoz21_dir: Path, tmp_path: Path, catalog: SchemaCatalog
    ) -> None:
        shutil.copy(multiwoz21_dir / "data.json", tmp_path / "data.json")
        dialogues, _ = load_multiwoz(tmp_path, "2.1", catalog=catalog)
        assert len(dialogues) == 11
        police = dialogues[-1]
        assert police.dialogue_id == "SNG99.json"
        assert len(police.turns[0].state) == 0
        assert police.turns[0].turn_domain is None

    def test_without_catalog_keeps_every_domain(self, multiwoz21_dir: Path) -> None:
        dialogues, _ = load_multiwoz(multiwoz21_dir, "2.1")
        assert len(dialogues) == 10

    def test_unknown_slots_skipped(self, tmp_path: Path, catalog: SchemaCatalog) -> None:
        data = {
            "X.json": {
                "goal": {},
                "log": [
                    {"text": "A hotel with a gym.", "metadata": {}},
                    {
                        "text": "Sure .",
                        "metadata": {"hotel": {"book": {}, "semi": {"gym": "yes", "area": "east"}}},
                    },
                ],
            }
        }
        (tmp_path / "data.json").write_text(json.dumps(data))
        dialogues, _ = load_multiwoz(tmp_path, "2.1", catalog=catalog)
        assert dialogues[0].turns[0].state.to_dict() == {"find_hotel": {"area": "east"}}

    def test_listed_but_missing(self, tmp_path: Path) -> None:
        (tmp_path / "data.json").write_text("{}")
        (tmp_path / "testListFile.txt").write_text("GONE.json\n")
        with pytest.raises(DatasetError, match="GONE.json"):
            load_multiwoz(tmp_path)

    def test_malformed_log(self, tmp_path: Path) -> None:
        (tmp_path / "data.json").write_text('{"A.json": {"log": [{"text": "hi"}]}}')
        with pytest.raises(DatasetError, match="unanswered"):
            load_multiwoz(tmp_path)

    def test_missing_files(self, tmp_path: Path) -> None:
        with pytest.raises(DatasetError):
            load_multiwoz(tmp_path / "nowhere")

    def test_unsupported_version(self, multiwoz21_dir: Path) -> None:
        with pytest.raises(DatasetError, match="Unsupported"):
            load_multiwoz(multiwoz21_dir, "2.4")


class TestMultiwoz22:
    """Tests for the 2.2 loader."""

    def test_dialogue(self, fixtures_dir: Path, catalog: SchemaCatalog) -> None:
        dialogues, goals = load_multiwoz(fixtures_dir / "multiwoz22", "2.2", catalog=catalog)
        (dialogue,) = dialogues
        assert dialogue.dialogue_id == "PMUL0001.json"
        assert [t.turn_domain for t in dialogue.turns] == [
            "find_restaurant",
            "find_restaurant",
            "find_taxi",
        ]
        assert dialogue.turns[1].state.to_dict() == {
            "find_restaurant": {
                "area": "north",
                "book_day": "friday",
                "book_people": "2",
                "book_time": "18:00",
                "pricerange": "cheap",
            }
        }
        assert dialogue.turns[2].state.domains == frozenset({"find_restaurant", "find_taxi"})
        assert dialogue.turns[0].response == "[value_name] is a cheap place in the north."
        assert dialogue.turns[1].response == (
            "It is at [value_address]. Your reference is [value_reference]."
        )
        assert dialogue.turns[2].response == "Booked a [value_car]."

        (goal,) = goals
        assert goal.requested["find_restaurant"] == frozenset({"address"})
        assert goal.domains == ("find_restaurant", "find_taxi")

    def test_missing_shards(self, tmp_path: Path) -> None:
        with pytest.raises(DatasetError, match="No dialogues"):
            load_multiwoz(tmp_path, "2.2")


class TestDelexicalize:
    """Tests for the delexicalizers and placeholder names."""

    def test_placeholder_names(self) -> None:
        assert placeholder_name("Addr") == "address"
        assert placeholder_name("restaurant-ref") == "reference"
        assert placeholder_name("trainID") == "id"
        assert placeholder_name("entrance fee") == "price"
        assert placeholder_name("Name") == "name"

    def test_word_spans(self) -> None:
        spans = [["Hotel-Inform", "Name", "a b", 0, 1], ["Hotel-Inform", "none", "x", 3, 3]]
        assert delexicalize_words("A B is x .", spans) == "[value_name] is x ."

    def test_word_spans_out_of_range_ignored(self) -> None:
        assert delexicalize_words("hi .", [["X", "Name", "v", 5, 6]]) == "hi ."

    def test_char_spans(self) -> None:
        spans = [{"slot": "hotel-name", "start": 0, "exclusive_end": 5}]
        assert delexicalize_chars("Acorn  is   nice", spans) == "[value_name] is nice"

    def test_gold_dialogue_needs_contiguous_turns(self) -> None:
        turn = GoldTurn("D", 1, "hi", DialogueState(), "ok")
        with pytest.raises(DatasetError, match="contiguous"):
            GoldDialogue("D", (turn,))
