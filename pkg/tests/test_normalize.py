"""Tests for value normalization and schema validation of calls."""

from __future__ import annotations

import pytest

from src.core.dialogue import FunctionCall
from src.core.schema import SchemaCatalog, SlotSpec, ValueKind
from src.parsing.normalize import make_normalizer, normalize_value
from src.parsing.outcome import WarningKind
from src.parsing.validate import (
    edit_distance,
    resolve_function_name,
    snap_enum,
    validate_call,
)

TIME = SlotSpec("leaveat", "departure time", ValueKind.TIME)
PEOPLE = SlotSpec("book_people", "party size", ValueKind.INTEGER)


class TestNormalizeValue:
    """Tests for normalize_value."""

    @pytest.mark.parametrize(
        ("raw", "expected"),
        [
            ("9am", "09:00"),
            ("9:30 pm", "21:30"),
            ("12 am", "00:00"),
            ("12pm", "12:00"),
            ("7.45", "07:45"),
            ("17:15", "17:15"),
            ("13pm", "13pm"),
            ("25:00", "25:00"),
            ("after lunch", "after lunch"),
            ("9", "9"),
        ],
    )
    def test_times(self, raw: str, expected: str) -> None:
        assert normalize_value(TIME, raw) == expected

    def test_number_words(self) -> None:
        assert normalize_value(PEOPLE, "Four") == "4"
        assert normalize_value(PEOPLE, "4") == "4"

    @pytest.mark.parametrize("raw", ["don't care", "Do Not Care", "dont care", "do nt care"])
    def test_dontcare_variants(self, raw: str) -> None:
        assert normalize_value(None, raw) == "dontcare"

    def test_case_and_whitespace(self) -> None:
        assert normalize_value(None, "  The   Acorn  ") == "the acorn"

    @pytest.mark.parametrize("raw", ["9am", "Four", " Don't Care ", "X  y", "7.45"])
    def test_idempotent(self, raw: str) -> None:
        for slot in (TIME, PEOPLE, None):
            once = normalize_value(slot, raw)
            assert normalize_value(slot, once) == once

    def test_normalizer_resolves_slots(self, toy_catalog: SchemaCatalog) -> None:
        normalize = make_normalizer(toy_catalog)
        assert normalize("find_restaurant", "book_time", "7pm") == "19:00"
        assert normalize("find_restaurant", "food", "7pm") == "7pm"
        assert normalize("find_unknown", "x", "A") == "a"


class TestResolveFunctionName:
    """Tests for resolve_function_name."""

    def test_exact(self, toy_catalog: SchemaCatalog) -> None:
        assert resolve_function_name("find_hotel", toy_catalog) == "find_hotel"

    def test_case_and_underscores(self, toy_catalog: SchemaCatalog) -> None:
        assert resolve_function_name("Find Hotel", toy_catalog) == "find_hotel"
        assert resolve_function_name("FINDHOTEL", toy_catalog) == "find_hotel"

    def test_bare_domain(self, toy_catalog: SchemaCatalog) -> None:
        assert resolve_function_name("restaurant", toy_catalog) == "find_restaurant"

    def test_unknown(self, toy_catalog: SchemaCatalog) -> None:
        assert resolve_function_name("find_taxi", toy_catalog) is None
        assert resolve_function_name(None, toy_catalog) is None


class TestSnapEnum:
    """Tests for edit_distance and snap_enum."""

    def test_edit_distance(self) -> None:
        assert edit_distance("kitten", "sitting") == 3
        assert edit_distance("", "abc") == 3
        assert edit_distance("same", "same") == 0

    def test_snaps_within_two_edits(self) -> None:
        assert snap_enum("centr", ("centre", "north")) == "centre"

    def test_leaves_distant_values(self) -> None:
        assert snap_enum("downtown", ("centre", "north")) == "downtown"


class TestValidateCall:
    """Tests for validate_call."""

    def test_clean_call(self, toy_catalog: SchemaCatalog) -> None:
        call = FunctionCall("find_restaurant", {"area": "centre", "food": "thai"})
        outcome = validate_call(call, toy_catalog.get("find_restaurant"))
        assert outcome.call == call
        assert outcome.warnings == ()

    def test_unknown_slot_dropped(self, toy_catalog: SchemaCatalog) -> None:
        call = FunctionCall("find_restaurant", {"area": "centre", "stars": "4"})
        outcome = validate_call(call, toy_catalog.get("find_restaurant"))
        assert outcome.call == FunctionCall("find_restaurant", {"area": "centre"})
        assert outcome.warning_kinds == [WarningKind.UNKNOWN_SLOT.value]

    def test_bad_enum_kept_and_flagged(self, toy_catalog: SchemaCatalog) -> None:
        call = FunctionCall("find_restaurant", {"area": "downtown"})
        outcome = validate_call(call, toy_catalog.get("find_restaurant"))
        assert outcome.call == call
        assert outcome.warning_kinds == ["bad_enum"]

    def test_case_differences_are_in_vocabulary(self, toy_catalog: SchemaCatalog) -> None:
        call = FunctionCall("find_restaurant", {"area": "Centre"})
        assert validate_call(call, toy_catalog.get("find_restaurant")).warnings == ()

    def test_dontcare_is_in_vocabulary(self, toy_catalog: SchemaCatalog) -> None:
        call = FunctionCall("find_restaurant", {"area": "don't care"})
        assert validate_call(call, toy_catalog.get("find_restaurant")).warnings == ()

    def test_snap_enums(self, toy_catalog: SchemaCatalog) -> None:
        call = FunctionCall("find_restaurant", {"area": "centr"})
        outcome = validate_call(call, toy_catalog.get("find_restaurant"), snap_enums=True)
        assert outcome.call == FunctionCall("find_restaurant", {"area": "centre"})
        assert outcome.warnings == ()

    def test_function_name_coerced(self, toy_catalog: SchemaCatalog) -> None:
        call = FunctionCall("Find_Hotel", {"parking": "yes"})
        outcome = validate_call(call, toy_catalog.get("find_hotel"))
        assert outcome.call is not None
        assert outcome.call.function == "find_hotel"
