"""Joint goal accuracy, slot F1, selection accuracy and Success rate."""

from __future__ import annotations

import logging
import re
from collections.abc import Mapping, Sequence

from src.core.dialogue import DialogueState, Normalizer, normalized_pairs
from src.evaluation.dataset import GoldTurn, UserGoal
from src.exceptions import MetricError
from src.parsing.normalize import make_normalizer

log = logging.getLogger(__name__)

_PLACEHOLDER_RE = re.compile(r"\[value_([a-z0-9_]+)\]", re.IGNORECASE)

# [value_name] offers an entity in every domain; these add domain-specific offers
OFFER_PLACEHOLDERS: Mapping[str, frozenset[str]] = {
    "find_train": frozenset({"id"}),
    "find_taxi": frozenset({"car", "phone"}),
}
_NAME_OFFER = frozenset({"name"})


def _check_aligned(preds: Sequence[DialogueState], golds: Sequence[GoldTurn]) -> None:
    if len(preds) != len(golds):
        raise MetricError(f"{len(preds)} predictions for {len(golds)} gold turns")


def _scoped(
    preds: Sequence[DialogueState],
    golds: Sequence[GoldTurn],
    scope: str | None,
    all_turns: bool,
) -> list[tuple[DialogueState, DialogueState]]:
    """Pairs of (pred, gold) states inside ``scope``; None means every domain."""
    _check_aligned(preds, golds)
    if scope is None:
        return [(pred, gold.state) for pred, gold in zip(preds, golds)]
    return [
        (pred.restrict(scope), gold.state.restrict(scope))
        for pred, gold in zip(preds, golds)
        if all_turns or scope in gold.active_domains
    ]


def joint_goal_accuracy(
    preds: Sequence[DialogueState],
    golds: Sequence[GoldTurn],
    scope: str | None = None,
    *,
    normalizer: Normalizer | None = None,
    all_turns: bool = False,
) -> float:
    """Fraction of turns whose normalized state matches gold exactly.

    With a domain ``scope`` both states are restricted to that domain and,
    unless ``all_turns``, only turns where it is active in gold count.

    Raises:
        MetricError: If the lists are misaligned or no turn is in scope.
    """
    normalize = normalizer or make_normalizer()
    pairs = _scoped(preds, golds, scope, all_turns)
    if not pairs:
        raise MetricError(f"No turns in scope {scope or 'overall'}")
    correct = sum(
        normalized_pairs(pred, normalize) == normalized_pairs(gold, normalize)
        for pred, gold in pairs
    )
    return correct / len(pairs)


def slot_f1(
    preds: Sequence[DialogueState],
    golds: Sequence[GoldTurn],
    scope: str | None = None,
    *,
    normalizer: Normalizer | None = None,
    all_turns: bool = False,
) -> float:
    """Micro F1 over (turn, domain, slot, value) items pooled across turns.

    Empty predictions against empty gold score 1.0.

    Raises:
        MetricError: If the lists are misaligned.
    """
    normalize = normalizer or make_normalizer()
    true_pos = n_pred = n_gold = 0
    for pred, gold in _scoped(preds, golds, scope, all_turns):
        pred_items = normalized_pairs(pred, normalize)
        gold_items = normalized_pairs(gold, normalize)
        true_pos += len(pred_items & gold_items)
        n_pred += len(pred_items)
        n_gold += len(gold_items)
    if n_pred == 0 and n_gold == 0:
        return 1.0
    return 2 * true_pos / (n_pred + n_gold)


def selection_accuracy(selected: Sequence[str | None], golds: Sequence[GoldTurn]) -> float | None:
    """Share of turns with a known gold domain where stage one picked it."""
    if len(selected) != len(golds):
        raise MetricError(f"{len(selected)} selections for {len(golds)} gold turns")
    judged = [(s, g.turn_domain) for s, g in zip(selected, golds) if g.turn_domain is not None]
    if not judged:
        return None
    return sum(s == gold for s, gold in judged) / len(judged)


def placeholders(responses: Sequence[str]) -> frozenset[str]:
    """Slot names of all ``[value_slot]`` placeholders, lowercased."""
    return frozenset(
        match.lower() for text in responses for match in _PLACEHOLDER_RE.findall(text)
    )


def dialogue_success(responses: Sequence[str], goal: UserGoal) -> bool:
    """Whether delexicalized responses offer an entity per goal domain and
    mention every requested slot."""
    found = placeholders(responses)
    for domain in goal.domains:
        if not found & (_NAME_OFFER | OFFER_PLACEHOLDERS.get(domain, frozenset())):
            return False
        if not goal.requested.get(domain, frozenset()) <= found:
            return False
    return True


def success_rate(responses: Mapping[str, Sequence[str]], goals: Sequence[UserGoal]) -> float:
    """Fraction of dialogues whose goals are met by their system responses.

    Raises:
        MetricError: If there are no dialogues to judge.
    """
    if not goals:
        raise MetricError("Success rate is undefined for zero dialogues")
    successes = 0
    for goal in goals:
        texts = responses.get(goal.dialogue_id, ())
        wants = any(goal.requested.values())
        if wants and not placeholders(texts):
            log.warning(
                "Dialogue %s has no delexicalized placeholders; judging anyway",
                goal.dialogue_id,
            )
        successes += dialogue_success(texts, goal)
    return successes / len(goals)
