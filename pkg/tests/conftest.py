"""Shared test fixtures."""

from __future__ import annotations

from pathlib import Path

import pytest

from src.constants import DEFAULT_CATALOG
from src.core.dialogue import AssistantOutput, DialogueContext, FunctionCall, Turn
from src.core.schema import FunctionSpec, SchemaCatalog, SlotSpec, ValueKind, load_catalog_file
from src.prompts.templates import ChatTemplate, TemplateRegistry

FIXTURES = Path(__file__).resolve().parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def multiwoz21_dir() -> Path:
    """The bundled ten-dialogue MultiWOZ 2.1 subset."""
    return FIXTURES / "multiwoz21"


@pytest.fixture
def mock_script() -> Path:
    """Rule replies that track the bundled subset (one taxi turn is wrong)."""
    return FIXTURES / "mock_replies.json"


@pytest.fixture
def catalog() -> SchemaCatalog:
    """The bundled five-domain MultiWOZ catalog."""
    return load_catalog_file(DEFAULT_CATALOG)


@pytest.fixture
def toy_catalog() -> SchemaCatalog:
    """A small two-function catalog covering every value kind."""
    return SchemaCatalog.from_specs(
        [
            FunctionSpec(
                name="find_restaurant",
                description="Find a restaurant",
                slots=(
                    SlotSpec(
                        "area",
                        "the area of town",
                        ValueKind.CATEGORICAL,
                        ("centre", "north", "south"),
                    ),
                    SlotSpec("food", "the cuisine"),
                    SlotSpec("book_time", "the reservation time", ValueKind.TIME),
                    SlotSpec("book_people", "the party size", ValueKind.INTEGER, is_required=True),
                ),
            ),
            FunctionSpec(
                name="find_hotel",
                description="Find a hotel",
                slots=(
                    SlotSpec("area", "the area of town", ValueKind.CATEGORICAL, ("east", "west")),
                    SlotSpec("parking", "free parking", ValueKind.BOOLEAN),
                ),
            ),
        ],
        version="toy",
    )


@pytest.fixture
def registry() -> TemplateRegistry:
    return TemplateRegistry.load()


@pytest.fixture
def plain_template(registry: TemplateRegistry) -> ChatTemplate:
    return registry.get("plain")


@pytest.fixture
def restaurant_context() -> DialogueContext:
    """One answered turn and a pending user utterance."""
    first = AssistantOutput(
        FunctionCall("find_restaurant", {"area": "centre"}), "What food would you like?"
    )
    return DialogueContext(
        (Turn("I want a restaurant in the centre.", first), Turn("Italian please."))
    )
