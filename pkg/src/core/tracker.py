"""Per-turn function selection and argument generation."""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

from src.backends.base import (
    Backend,
    CompletionRequest,
    CompletionResult,
    FinishReason,
    GenerationParams,
    complete,
)
from src.config.models import Fallback
from src.constants import DOMAIN_CLOSE, DOMAIN_OPEN, SELECTION_MAX_TOKENS
from src.core.dialogue import (
    AssistantOutput,
    DialogueContext,
    DialogueState,
    FunctionCall,
    update_state,
)
from src.core.schema import SchemaCatalog
from src.exceptions import BackendError, ConfigurationError, FixtureMissingError
from src.parsing.extract import extract_domain, extract_function_call
from src.parsing.outcome import ParseWarning, WarningKind
from src.parsing.validate import resolve_function_name, validate_call
from src.prompts.builder import (
    ExampleConversation,
    Mode,
    PromptConfig,
    build_argument_messages,
    build_monolithic_messages,
    build_selection_messages,
    interleave_examples,
)
from src.prompts.templates import ChatMessage, ChatTemplate, apply_chat_template, count_prompt_units

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrackerConfig:
    """Prompt options, backend and resources for one tracking run."""

    prompt: PromptConfig
    backend: Backend
    template: ChatTemplate
    catalog: SchemaCatalog
    examples: Mapping[str, Sequence[ExampleConversation]] = field(default_factory=dict)
    fallback: Fallback = Fallback.REUSE_PREVIOUS
    params: GenerationParams = field(default_factory=GenerationParams)
    model_id: str = ""
    raw_completion: bool = False
    snap_enums: bool = False
    end_to_end: bool = False

    def __post_init__(self) -> None:
        oracle = self.prompt.oracle_domain
        if oracle is not None and oracle not in self.catalog:
            raise ConfigurationError(f"Oracle domain '{oracle}' is not in the catalog")
        short = [
            name
            for name in self.catalog.names
            if len(self.examples.get(name, ())) < self.prompt.n_shot
        ]
        if short:
            raise ConfigurationError(
                f"Fewer than {self.prompt.n_shot} example conversations for: {', '.join(short)}"
            )


@dataclass(frozen=True)
class StageUnits:
    """Prompt units consumed per stage; monolithic runs report under ``arguments``."""

    selection: int = 0
    arguments: int = 0
    arguments_system: int = 0

    @property
    def total(self) -> int:
        return self.selection + self.arguments

    def to_dict(self) -> dict[str, int]:
        return {
            "selection": self.selection,
            "arguments": self.arguments,
            "arguments_system": self.arguments_system,
        }


@dataclass(frozen=True)
class TurnResult:
    selected_function: str | None
    call: FunctionCall | None
    state_after: DialogueState
    response: str
    warnings: tuple[ParseWarning, ...] = ()
    units: StageUnits = field(default_factory=StageUnits)
    oracle: bool = False
    error: str | None = None


@dataclass(frozen=True)
class UserTurn:
    """A user utterance with the annotated assistant response, when known."""

    user: str
    gold_response: str | None = None


class Tracker:
    """Runs the two-stage (or single-stage) pipeline turn by turn."""

    def __init__(self, config: TrackerConfig) -> None:
        self._config = config

    def track_turn(self, context: DialogueContext, state: DialogueState) -> TurnResult:
        """Track the pending user utterance of ``context``.

        Backend failures are carried in the result; the state is then unchanged.
        """
        if self._config.prompt.mode is Mode.MONOLITHIC:
            return self._track_monolithic(context, state)
        return self._track_decomposed(context, state)

    def run_dialogue(self, turns: Sequence[UserTurn]) -> list[TurnResult]:
        """Track every turn of a dialogue, threading state and context."""
        context = DialogueContext()
        state = DialogueState()
        results = []
        for turn in turns:
            context = context.with_user(turn.user)
            result = self.track_turn(context, state)
            results.append(result)
            state = result.state_after

            response = result.response
            if turn.gold_response is not None and not self._config.end_to_end:
                response = turn.gold_response
            if result.call is not None or response:
                context = context.answered(AssistantOutput(call=result.call, response=response))
        return results

    # -- stages -------------------------------------------------------------

    def _track_decomposed(self, context: DialogueContext, state: DialogueState) -> TurnResult:
        cfg = self._config
        warnings: list[ParseWarning] = []
        oracle = cfg.prompt.oracle_domain
        selection_units = 0

        if oracle is not None:
            selected: str | None = oracle
        else:
            messages = build_selection_messages(cfg.catalog, context, cfg.template, cfg.prompt)
            selection_units = self._units(messages)
            params = cfg.params.with_limits(SELECTION_MAX_TOKENS, DOMAIN_CLOSE)
            try:
                result = self._complete(messages, params, "selection")
            except BackendError as exc:
                return self._failed(state, exc, warnings, StageUnits(selection=selection_units))
            selected = self._select(result, context, warnings)
            if selected is None:
                return TurnResult(
                    selected_function=None,
                    call=None,
                    state_after=state,
                    response="",
                    warnings=tuple(warnings),
                    units=StageUnits(selection=selection_units),
                )

        spec = cfg.catalog.get(selected)
        messages = build_argument_messages(
            spec, context, cfg.examples.get(selected, ()), cfg.template, cfg.prompt
        )
        units = StageUnits(
            selection=selection_units,
            arguments=self._units(messages),
            arguments_system=count_prompt_units(messages[0].content),
        )
        try:
            result = self._complete(messages, cfg.params, "arguments")
        except BackendError as exc:
            return self._failed(state, exc, warnings, units, selected, oracle is not None)

        outcome = extract_function_call(result.text)
        warnings.extend(outcome.warnings)
        call = self._checked_call(outcome.call, selected, warnings)
        return TurnResult(
            selected_function=selected,
            call=call,
            state_after=update_state(state, call) if call is not None else state,
            response=outcome.response.strip() if call is not None else result.text.strip(),
            warnings=tuple(warnings),
            units=units,
            oracle=oracle is not None,
        )

    def _track_monolithic(self, context: DialogueContext, state: DialogueState) -> TurnResult:
        cfg = self._config
        warnings: list[ParseWarning] = []
        examples = interleave_examples(cfg.examples, cfg.catalog.names)
        messages = build_monolithic_messages(
            cfg.catalog, context, cfg.template, cfg.prompt, examples
        )
        units = StageUnits(
            arguments=self._units(messages),
            arguments_system=count_prompt_units(messages[0].content),
        )
        try:
            result = self._complete(messages, cfg.params, "monolithic")
        except BackendError as exc:
            return self._failed(state, exc, warnings, units)

        outcome = extract_function_call(result.text)
        warnings.extend(outcome.warnings)
        call = None
        if outcome.call is not None:
            target = resolve_function_name(outcome.call.function, cfg.catalog)
            if target is None:
                warnings.append(
                    ParseWarning(WarningKind.UNKNOWN_FUNCTION, outcome.call.function)
                )
            else:
                call = self._validated(outcome.call, target, warnings)
        return TurnResult(
            selected_function=call.function if call is not None else None,
            call=call,
            state_after=update_state(state, call) if call is not None else state,
            response=outcome.response.strip() if call is not None else result.text.strip(),
            warnings=tuple(warnings),
            units=units,
        )

    # -- helpers --------------------------------------------------------------

    def _complete(
        self, messages: list[ChatMessage], params: GenerationParams, stage: str
    ) -> CompletionResult:
        cfg = self._config
        request = CompletionRequest(
            messages=tuple(messages),
            params=params,
            model_id=cfg.model_id,
            prompt=apply_chat_template(messages, cfg.template) if cfg.raw_completion else None,
            stage=stage,
        )
        result = complete(request, cfg.backend)
        if result.finish_reason is FinishReason.ERROR:
            raise BackendError(f"{stage} completion finished with an error")
        return result

    def _units(self, messages: list[ChatMessage]) -> int:
        return count_prompt_units(apply_chat_template(messages, self._config.template))

    def _select(
        self,
        result: CompletionResult,
        context: DialogueContext,
        warnings: list[ParseWarning],
    ) -> str | None:
        text = result.text
        # the stop sequence swallows the closing tag
        if DOMAIN_OPEN in text and DOMAIN_CLOSE not in text:
            if result.finish_reason is FinishReason.STOP:
                text += DOMAIN_CLOSE
        raw = extract_domain(text, warnings)
        selected = resolve_function_name(raw, self._config.catalog)
        if raw is not None and selected is None:
            warnings.append(ParseWarning(WarningKind.UNKNOWN_FUNCTION, raw))
        if selected is not None:
            return selected

        warnings.append(ParseWarning(WarningKind.NO_SELECTION, text.strip()[:80]))
        if self._config.fallback is Fallback.REUSE_PREVIOUS:
            previous = _previous_function(context)
            if previous is not None and previous in self._config.catalog:
                warnings.append(ParseWarning(WarningKind.SELECTION_FALLBACK, previous))
                return previous
        return None

    def _checked_call(
        self,
        call: FunctionCall | None,
        selected: str,
        warnings: list[ParseWarning],
    ) -> FunctionCall | None:
        if call is None:
            return None
        target = resolve_function_name(call.function, self._config.catalog)
        if target is None:
            warnings.append(ParseWarning(WarningKind.UNKNOWN_FUNCTION, call.function))
            target = selected
        elif target != selected:
            warnings.append(
                ParseWarning(WarningKind.FUNCTION_MISMATCH, f"selected {selected}, called {target}")
            )
        return self._validated(call, target, warnings)

    def _validated(
        self, call: FunctionCall, target: str, warnings: list[ParseWarning]
    ) -> FunctionCall | None:
        outcome = validate_call(
            FunctionCall(target, call.arguments),
            self._config.catalog.get(target),
            snap_enums=self._config.snap_enums,
        )
        warnings.extend(outcome.warnings)
        return outcome.call

    def _failed(
        self,
        state: DialogueState,
        exc: BackendError,
        warnings: list[ParseWarning],
        units: StageUnits,
        selected: str | None = None,
        oracle: bool = False,
    ) -> TurnResult:
        """A turn whose backend call failed keeps the previous state.

        Raises:
            FixtureMissingError: If the replay store has no entry for a request.
        """
        if isinstance(exc, FixtureMissingError):
            raise exc
        log.warning("Turn failed: %s", exc)
        warnings.append(ParseWarning(WarningKind.BACKEND_ERROR, str(exc)))
        return TurnResult(
            selected_function=selected,
            call=None,
            state_after=state,
            response="",
            warnings=tuple(warnings),
            units=units,
            oracle=oracle,
            error=str(exc),
        )


def _previous_function(context: DialogueContext) -> str | None:
    for turn in reversed(context.turns):
        if turn.assistant is not None and turn.assistant.call is not None:
            return turn.assistant.call.function
    return None


def track_turn(
    context: DialogueContext, state: DialogueState, cfg: TrackerConfig
) -> TurnResult:
    return Tracker(cfg).track_turn(context, state)


def run_dialogue(turns: Sequence[UserTurn], cfg: TrackerConfig) -> list[TurnResult]:
    return Tracker(cfg).run_dialogue(turns)


def run_dialogues(
    dialogues: Sequence[tuple[str, Sequence[UserTurn]]],
    cfg: TrackerConfig,
    parallelism: int = 1,
) -> list[tuple[str, list[TurnResult]]]:
    """Track independent dialogues concurrently; output keeps input order."""
    tracker = Tracker(cfg)
    if parallelism <= 1:
        return [(dialogue_id, tracker.run_dialogue(turns)) for dialogue_id, turns in dialogues]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        futures = [pool.submit(tracker.run_dialogue, turns) for _, turns in dialogues]
        return [(d_id, future.result()) for (d_id, _), future in zip(dialogues, futures)]


def manifest_record(dialogue_id: str, turn: int, result: TurnResult) -> dict[str, Any]:
    """One run-manifest line."""
    return {
        "dialogue_id": dialogue_id,
        "turn": turn,
        "selected": result.selected_function,
        "oracle": result.oracle,
        "call": result.call.to_dict() if result.call is not None else None,
        "state": result.state_after.to_dict(),
        "response": result.response,
        "warnings": [w.to_dict() for w in result.warnings],
        "units": result.units.to_dict(),
        "error": result.error,
    }
