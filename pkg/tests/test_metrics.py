"""Tests for dialogue state tracking metrics."""

from __future__ import annotations

import random

import pytest

from src.core.dialogue import DialogueState
from src.core.schema import SchemaCatalog
from src.evaluation.dataset import GoldTurn, UserGoal
from src.evaluation.metrics import (
    dialogue_success,
    joint_goal_accuracy,
    placeholders,
    selection_accuracy,
    slot_f1,
    success_rate,
)
from src.exceptions import MetricError
from src.parsing.normalize import make_normalizer

DOMAINS = ("find_attraction", "find_hotel", "find_restaurant", "find_taxi", "find_train")
SLOTS = ("area", "day", "name")
VALUES = ("east", "west", "monday", "acorn")
EXACT = {"abs": 1e-12, "rel": 0}


def _gold(
    state: dict[str, dict[str, str]], turn_domain: str | None = None, index: int = 0
) -> GoldTurn:
    gold = DialogueState(state)
    active = gold.domains | ({turn_domain} if turn_domain else frozenset())
    return GoldTurn("D", index, "u", gold, "", frozenset(active), turn_domain)


def _random_state(rng: random.Random) -> dict[str, dict[str, str]]:
    state: dict[str, dict[str, str]] = {}
    for domain in rng.sample(DOMAINS, rng.randrange(len(DOMAINS) + 1)):
        slots = rng.sample(SLOTS, rng.randrange(1, len(SLOTS) + 1))
        state[domain] = {slot: rng.choice(VALUES) for slot in slots}
    return state


def _items(index: int, state: dict[str, dict[str, str]]) -> set[tuple[int, str, str, str]]:
    return {(index, d, s, v) for d, slots in state.items() for s, v in slots.items()}


def _only(state: dict[str, dict[str, str]], domain: str) -> dict[str, dict[str, str]]:
    return {domain: state[domain]} if domain in state else {}


def _reference_jga(pairs: list[tuple[dict, dict]]) -> float:  # type: ignore[type-arg]
    return sum(p == g for p, g in pairs) / len(pairs)


def _reference_f1(pairs: list[tuple[dict, dict]]) -> float:  # type: ignore[type-arg]
    pred: set[tuple[int, str, str, str]] = set()
    gold: set[tuple[int, str, str, str]] = set()
    for i, (p, g) in enumerate(pairs):
        pred |= _items(i, p)
        gold |= _items(i, g)
    if not pred and not gold:
        return 1.0
    return 2 * len(pred & gold) / (len(pred) + len(gold))


class TestAgainstReference:
    """Randomized comparison with a direct set-based computation."""

    def test_overall_and_per_domain(self) -> None:
        rng = random.Random(2024)
        preds, golds, raw = [], [], []
        for i in range(200):
            gold_state = _random_state(rng)
            pred_state = gold_state if rng.random() < 0.4 else _random_state(rng)
            turn_domain = rng.choice((None,) + DOMAINS)
            preds.append(DialogueState(pred_state))
            golds.append(_gold(gold_state, turn_domain, i))
            raw.append((pred_state, gold_state, golds[-1].active_domains))

        pairs = [(p, g) for p, g, _ in raw]
        assert joint_goal_accuracy(preds, golds) == pytest.approx(_reference_jga(pairs), **EXACT)
        assert slot_f1(preds, golds) == pytest.approx(_reference_f1(pairs), **EXACT)

        for domain in DOMAINS:
            scoped = [
                (_only(p, domain), _only(g, domain)) for p, g, active in raw if domain in active
            ]
            assert joint_goal_accuracy(preds, golds, domain) == pytest.approx(
                _reference_jga(scoped), **EXACT
            )
            assert slot_f1(preds, golds, domain) == pytest.approx(
                _reference_f1(scoped), **EXACT
            )


class TestJointGoalAccuracy:
    """Tests for joint_goal_accuracy."""

    def test_normalized_values_match(self, catalog: SchemaCatalog) -> None:
        pred = DialogueState({"find_train": {"leaveat": "9am", "day": "Monday"}})
        gold = _gold({"find_train": {"leaveat": "09:00", "day": "monday"}})
        normalizer = make_normalizer(catalog)
        assert joint_goal_accuracy([pred], [gold], normalizer=normalizer) == 1.0

    def test_extra_slot_is_wrong(self) -> None:
        pred = DialogueState({"find_hotel": {"area": "east", "name": "acorn"}})
        assert joint_goal_accuracy([pred], [_gold({"find_hotel": {"area": "east"}})]) == 0.0

    def test_empty_states_match(self) -> None:
        assert joint_goal_accuracy([DialogueState()], [_gold({})]) == 1.0

    def test_misaligned_raises(self) -> None:
        with pytest.raises(MetricError, match="1 predictions for 2 gold turns"):
            joint_goal_accuracy([DialogueState()], [_gold({}), _gold({})])

    def test_domain_never_active_raises(self) -> None:
        with pytest.raises(MetricError, match="find_taxi"):
            joint_goal_accuracy([DialogueState()], [_gold({"find_hotel": {"a": "b"}})], "find_taxi")

    def test_all_turns_counts_inactive_turns(self) -> None:
        preds = [DialogueState(), DialogueState({"find_hotel": {"area": "west"}})]
        golds = [_gold({}), _gold({"find_hotel": {"area": "east"}})]
        assert joint_goal_accuracy(preds, golds, "find_hotel") == 0.0
        assert joint_goal_accuracy(preds, golds, "find_hotel", all_turns=True) == 0.5

    def test_turn_domain_makes_domain_active(self) -> None:
        pred = DialogueState({"find_taxi": {"day": "monday"}})
        gold = _gold({}, turn_domain="find_taxi")
        assert joint_goal_accuracy([pred], [gold], "find_taxi") == 0.0


class TestSlotF1:
    """Tests for slot_f1."""

    def test_partial_overlap(self) -> None:
        pred = DialogueState({"find_hotel": {"area": "east", "name": "acorn"}})
        gold = _gold({"find_hotel": {"area": "east", "day": "monday"}})
        assert slot_f1([pred], [gold]) == pytest.approx(0.5)

    def test_empty_against_empty(self) -> None:
        assert slot_f1([DialogueState()], [_gold({})]) == 1.0

    def test_nothing_predicted(self) -> None:
        assert slot_f1([DialogueState()], [_gold({"find_hotel": {"area": "east"}})]) == 0.0


class TestSelectionAccuracy:
    """Tests for selection_accuracy."""

    def test_counts_turns_with_gold_domain(self) -> None:
        golds = [_gold({}, "find_hotel"), _gold({}, "find_taxi"), _gold({})]
        assert selection_accuracy(["find_hotel", None, "find_train"], golds) == 0.5

    def test_undefined_without_gold_domains(self) -> None:
        assert selection_accuracy([None], [_gold({})]) is None

    def test_misaligned_raises(self) -> None:
        with pytest.raises(MetricError):
            selection_accuracy([], [_gold({})])


class TestSuccess:
    """Tests for placeholder-based Success."""

    def test_placeholders_lowercased(self) -> None:
        assert placeholders(["[value_Name] at [value_address]", "no slots"]) == frozenset(
            {"name", "address"}
        )

    def test_offer_and_requests(self) -> None:
        goal = UserGoal("D", {"find_hotel": {"area": "east"}}, {"find_hotel": frozenset({"phone"})})
        assert dialogue_success(["[value_name] is nice .", "Call [value_phone] ."], goal)
        assert not dialogue_success(["[value_name] is nice ."], goal)
        assert not dialogue_success(["Call [value_phone] ."], goal)

    def test_domain_specific_offers(self) -> None:
        train = UserGoal("D", {"find_train": {"day": "monday"}})
        taxi = UserGoal("D", {"find_taxi": {"departure": "x"}})
        assert dialogue_success(["[value_id] leaves soon ."], train)
        assert dialogue_success(["A [value_car] is booked ."], taxi)
        assert not dialogue_success(["[value_id] leaves soon ."], taxi)

    def test_name_offers_in_every_domain(self) -> None:
        goal = UserGoal("D", {"find_hotel": {}, "find_train": {}, "find_taxi": {}})
        assert dialogue_success(["[value_name] ."], goal)

    def test_every_domain_must_be_served(self) -> None:
        goal = UserGoal("D", {"find_train": {}, "find_taxi": {}})
        assert not dialogue_success(["[value_id] ."], goal)
        assert not dialogue_success(["[value_car] ."], goal)
        assert dialogue_success(["[value_id] and [value_car] ."], goal)

    def test_rate(self) -> None:
        goals = [
            UserGoal("A", {"find_hotel": {}}),
            UserGoal("B", {"find_hotel": {}}),
        ]
        responses = {"A": ["[value_name] ."], "B": ["Sorry ."]}
        assert success_rate(responses, goals) == 0.5

    def test_rate_without_goals(self) -> None:
        with pytest.raises(MetricError):
            success_rate({}, [])

    def test_warns_on_lexicalized_responses(self, caplog: pytest.LogCaptureFixture) -> None:
        goal = UserGoal("A", {"find_hotel": {}}, {"find_hotel": frozenset({"phone"})})
        assert success_rate({"A": ["Call 01223 ."]}, [goal]) == 0.0
        assert "no delexicalized placeholders" in caplog.text
