"""Tests for function specifications and catalogs."""

from __future__ import annotations

import json

import pytest

from src.core.schema import (
    FunctionSpec,
    SchemaCatalog,
    SlotSpec,
    ValueKind,
    dump_catalog,
    load_catalog,
    render_brief_descriptions,
    render_spec_json,
    render_spec_text,
    split_ontology_key,
)
from src.exceptions import SchemaError, SchemaValidationError


class TestSlotSpec:
    """Tests for SlotSpec invariants."""

    def test_categorical_needs_values(self) -> None:
        with pytest.raises(SchemaValidationError, match="no values"):
            SlotSpec("area", "the area", ValueKind.CATEGORICAL)

    def test_categorical_rejects_duplicates(self) -> None:
        with pytest.raises(SchemaValidationError, match="duplicate"):
            SlotSpec("area", "the area", ValueKind.CATEGORICAL, ("north", "north"))

    def test_bad_name_rejected(self) -> None:
        with pytest.raises(SchemaValidationError):
            SlotSpec("Book Day", "the day")


class TestFunctionSpec:
    """Tests for FunctionSpec."""

    def test_repeated_slot_rejected(self) -> None:
        with pytest.raises(SchemaValidationError, match="repeats slots: area"):
            FunctionSpec("find_x", "x", (SlotSpec("area", "a"), SlotSpec("area", "b")))

    def test_slot_lookup(self, toy_catalog: SchemaCatalog) -> None:
        spec = toy_catalog.get("find_restaurant")
        assert spec.slot_names == ("area", "food", "book_time", "book_people")
        assert spec.slot("food") is not None
        assert spec.slot("stars") is None


class TestSchemaCatalog:
    """Tests for SchemaCatalog."""

    def test_preserves_declaration_order(self, toy_catalog: SchemaCatalog) -> None:
        assert toy_catalog.names == ("find_restaurant", "find_hotel")
        assert len(toy_catalog) == 2
        assert "find_hotel" in toy_catalog

    def test_duplicate_function_rejected(self) -> None:
        spec = FunctionSpec("find_x", "x")
        with pytest.raises(SchemaValidationError, match="Duplicate function"):
            SchemaCatalog.from_specs([spec, spec])

    def test_empty_catalog_rejected(self) -> None:
        with pytest.raises(SchemaValidationError, match="at least one"):
            SchemaCatalog.from_specs([])

    def test_unknown_function_raises(self, toy_catalog: SchemaCatalog) -> None:
        with pytest.raises(SchemaValidationError, match="Unknown function: find_taxi"):
            toy_catalog.get("find_taxi")

    def test_subset_keeps_catalog_order(self, toy_catalog: SchemaCatalog) -> None:
        subset = toy_catalog.subset(["find_hotel", "find_restaurant"])
        assert subset.names == ("find_restaurant", "find_hotel")
        assert toy_catalog.subset(["find_hotel"]).names == ("find_hotel",)

    def test_bundled_catalog(self, catalog: SchemaCatalog) -> None:
        assert catalog.names == (
            "find_attraction",
            "find_hotel",
            "find_restaurant",
            "find_taxi",
            "find_train",
        )
        stars = catalog.get("find_hotel").slot("stars")
        assert stars is not None and stars.value_kind is ValueKind.INTEGER


class TestLoadNative:
    """Tests for the native schema document format."""

    def test_dump_then_load_is_identity(self, toy_catalog: SchemaCatalog) -> None:
        assert load_catalog(dump_catalog(toy_catalog)) == toy_catalog

    def test_malformed_json_reports_location(self) -> None:
        with pytest.raises(SchemaError, match="line 1"):
            load_catalog('{"version": ')

    def test_unknown_key_reports_path(self) -> None:
        document = {
            "version": "v",
            "functions": [
                {
                    "name": "find_x",
                    "description": "x",
                    "slots": [{"name": "a", "description": "a", "kind": "free_text", "min": 1}],
                }
            ],
        }
        with pytest.raises(SchemaError, match=r"functions\[0\]\.slots\[0\]"):
            load_catalog(json.dumps(document))

    def test_unknown_kind_rejected(self) -> None:
        document = {
            "version": "v",
            "functions": [
                {
                    "name": "find_x",
                    "description": "x",
                    "slots": [{"name": "a", "description": "a", "kind": "date"}],
                }
            ],
        }
        with pytest.raises(SchemaError, match="unknown kind 'date'"):
            load_catalog(json.dumps(document))

    def test_unknown_format_rejected(self) -> None:
        with pytest.raises(SchemaError, match="Unknown schema format"):
            load_catalog("{}", "sgd_yaml")


class TestMultiwozOntology:
    """Tests for importing the flat MultiWOZ ontology."""

    def test_split_keys(self) -> None:
        assert split_ontology_key("hotel-book day") == ("hotel", "book_day")
        assert split_ontology_key("train-leaveAt") == ("train", "leaveat")
        assert split_ontology_key("hotel-semi-price range") == ("hotel", "pricerange")

    def test_split_rejects_bare_key(self) -> None:
        with pytest.raises(SchemaError):
            split_ontology_key("hotel")

    def test_import_groups_by_domain(self) -> None:
        ontology = {
            "hotel-area": ["east"],
            "hotel-book day": ["monday"],
            "train-leaveAt": ["09:00"],
            "bus-day": ["monday"],
        }
        descriptions = {
            "version": "test",
            "domains": {
                "hotel": {
                    "description": "Find a hotel",
                    "slots": {"area": {"description": "the area", "kind": "free_text"}},
                },
                "train": {
                    "description": "Find a train",
                    "slots": {"leaveat": {"description": "departure time", "kind": "time"}},
                },
            },
        }
        catalog = load_catalog(
            json.dumps(ontology), "multiwoz_ontology", descriptions=descriptions
        )
        assert catalog.names == ("find_hotel", "find_train")
        assert catalog.get("find_hotel").slot_names == ("area", "book_day")
        book_day = catalog.get("find_hotel").slot("book_day")
        assert book_day is not None and book_day.value_kind is ValueKind.FREE_TEXT
        leaveat = catalog.get("find_train").slot("leaveat")
        assert leaveat is not None and leaveat.value_kind is ValueKind.TIME


class TestRendering:
    """Tests for spec renderers."""

    def test_json_key_order_and_types(self, toy_catalog: SchemaCatalog) -> None:
        rendered = render_spec_json(toy_catalog.get("find_restaurant"))
        assert rendered.startswith('{"name": "find_restaurant", "description": ')
        parsed = json.loads(rendered)
        assert list(parsed) == ["name", "description", "parameters"]
        assert list(parsed["parameters"]) == ["area", "food", "book_time", "book_people"]
        assert parsed["parameters"]["area"] == {
            "description": "the area of town",
            "type": "string",
            "enum": ["centre", "north", "south"],
        }
        assert parsed["parameters"]["book_people"]["type"] == "integer"
        assert parsed["parameters"]["book_people"]["required"] is True

    def test_time_slots_carry_format_hint(self, toy_catalog: SchemaCatalog) -> None:
        parsed = json.loads(render_spec_json(toy_catalog.get("find_restaurant")))
        assert parsed["parameters"]["book_time"]["description"] == (
            "the reservation time (24-hour format hh:mm)"
        )

    def test_rendering_is_stable(self, toy_catalog: SchemaCatalog) -> None:
        spec = toy_catalog.get("find_hotel")
        assert render_spec_json(spec) == render_spec_json(spec)

    def test_text_rendering(self, toy_catalog: SchemaCatalog) -> None:
        assert render_spec_text(toy_catalog.get("find_hotel")) == (
            "Function find_hotel: Find a hotel.\n"
            "- area: the area of town. Possible values: east, west.\n"
            "- parking: free parking. The value is yes or no."
        )

    def test_brief_descriptions(self, toy_catalog: SchemaCatalog) -> None:
        assert render_brief_descriptions(toy_catalog) == (
            "find_restaurant: Find a restaurant.\nfind_hotel: Find a hotel."
        )
