"""Prompt assembly for function selection and argument generation."""

from __future__ import annotations

import json
import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from enum import Enum
from itertools import chain, zip_longest
from pathlib import Path

from src.constants import (
    ARGUMENT_INSTRUCTION,
    EXAMPLES_CLOSE,
    EXAMPLES_OPEN,
    FUNCTION_CALL_CLOSE,
    FUNCTION_CALL_OPEN,
    FUNCTIONS_CLOSE,
    FUNCTIONS_OPEN,
    MONOLITHIC_INSTRUCTION,
    SELECTION_INSTRUCTION,
    SYSTEM_INSTRUCTION,
)
from src.core.dialogue import AssistantOutput, DialogueContext
from src.core.schema import (
    FunctionSpec,
    SchemaCatalog,
    render_brief_descriptions,
    render_spec,
)
from src.exceptions import PromptError, TrackerError
from src.prompts.templates import (
    ChatMessage,
    ChatTemplate,
    Role,
    apply_chat_template,
    count_prompt_units,
)

log = logging.getLogger(__name__)


class Mode(str, Enum):
    DECOMPOSED = "decomposed"
    MONOLITHIC = "monolithic"


class SpecRendering(str, Enum):
    JSON = "json"
    TEXT = "text"


@dataclass(frozen=True)
class PromptConfig:
    """Prompt-shaping options, one per ablation axis."""

    mode: Mode = Mode.DECOMPOSED
    spec_rendering: SpecRendering = SpecRendering.JSON
    n_shot: int = 0
    include_prev_calls: bool = True
    oracle_domain: str | None = None
    unit_budget: int | None = None

    def __post_init__(self) -> None:
        if self.n_shot < 0:
            raise PromptError(f"n_shot must be >= 0, got {self.n_shot}")


@dataclass(frozen=True)
class ExampleConversation:
    """A demonstration dialogue for one domain; every assistant turn calls it."""

    domain: str
    turns: DialogueContext

    def __post_init__(self) -> None:
        for i, turn in enumerate(self.turns.turns):
            call = turn.assistant.call if turn.assistant else None
            if call is None:
                raise PromptError(f"Example for {self.domain}: turn {i} has no function call")
            if call.function != self.domain:
                raise PromptError(
                    f"Example for {self.domain}: turn {i} calls {call.function}"
                )


def build_system_prompt(instruction: str, spec_block: str, examples: Sequence[str]) -> str:
    """Instruction, then the FUNCTIONS block, then the EXAMPLES block if any.

    Raises:
        PromptError: If the instruction is empty.
    """
    if not instruction.strip():
        raise PromptError("System prompt instruction cannot be empty")
    sections = [instruction, f"{FUNCTIONS_OPEN}\n{spec_block}\n{FUNCTIONS_CLOSE}"]
    if examples:
        sections.append(f"{EXAMPLES_OPEN}\n" + "\n\n".join(examples) + f"\n{EXAMPLES_CLOSE}")
    return "\n\n".join(sections)


def render_call(output: AssistantOutput) -> str:
    """The ``<function_call> {...} </function_call>`` span of an assistant output."""
    if output.call is None:
        return ""
    return f"{FUNCTION_CALL_OPEN} {output.call.to_json()} {FUNCTION_CALL_CLOSE}"


def render_assistant_output(output: AssistantOutput, include_call: bool = True) -> str:
    """Assistant content: the call span (when wanted) followed by the response."""
    parts = []
    if include_call and output.call is not None:
        parts.append(render_call(output))
    if output.response:
        parts.append(output.response)
    return " ".join(parts)


def render_example(example: ExampleConversation) -> str:
    lines = []
    for turn in example.turns.turns:
        lines.append(f"User: {turn.user}")
        if turn.assistant is not None:
            lines.append(f"Assistant: {render_assistant_output(turn.assistant)}")
    return "\n".join(lines)


def serialize_context(context: DialogueContext, include_prev_calls: bool) -> list[ChatMessage]:
    """One user message per utterance and one assistant message per reply."""
    messages = []
    for turn in context.turns:
        messages.append(ChatMessage(Role.USER, turn.user))
        if turn.assistant is None:
            continue
        content = render_assistant_output(turn.assistant, include_prev_calls)
        if content:
            messages.append(ChatMessage(Role.ASSISTANT, content))
    return messages


def interleave_examples(
    examples: Mapping[str, Sequence[ExampleConversation]], domains: Sequence[str]
) -> list[ExampleConversation]:
    """Round-robin over domains: every domain's first example, then every second, and so on."""
    columns = zip_longest(*(examples.get(domain, ()) for domain in domains))
    return [example for example in chain.from_iterable(columns) if example is not None]


def _with_directive(system_prompt: str, directive: str) -> str:
    return f"{system_prompt}\n\n{directive}"


def _require_pending(context: DialogueContext) -> None:
    if not context.has_pending_user:
        raise PromptError("Dialogue context has no pending user utterance")


def build_selection_messages(
    catalog: SchemaCatalog,
    context: DialogueContext,
    template: ChatTemplate,
    cfg: PromptConfig,
) -> list[ChatMessage]:
    """Stage-one prompt: brief function list and a request for a ``<domain>`` tag.

    Raises:
        PromptError: If the catalog is empty or no user utterance is pending.
    """
    if not len(catalog):
        raise PromptError("Cannot select from an empty catalog")
    _require_pending(context)
    system = _with_directive(
        build_system_prompt(SYSTEM_INSTRUCTION, render_brief_descriptions(catalog), []),
        SELECTION_INSTRUCTION,
    )
    return _assemble(system, context, template, cfg)


def build_argument_messages(
    spec: FunctionSpec,
    context: DialogueContext,
    examples: Sequence[ExampleConversation],
    template: ChatTemplate,
    cfg: PromptConfig,
) -> list[ChatMessage]:
    """Stage-two prompt: the chosen function's full spec and ``n_shot`` examples.

    Raises:
        PromptError: If an example belongs to another domain, too few examples
            are available, or no user utterance is pending.
    """
    _require_pending(context)
    for example in examples:
        if example.domain != spec.name:
            raise PromptError(f"Example for {example.domain} given to {spec.name}")
    if len(examples) < cfg.n_shot:
        raise PromptError(
            f"{spec.name} has {len(examples)} example conversations, {cfg.n_shot} requested"
        )
    rendered = [render_example(example) for example in examples[: cfg.n_shot]]
    system = _with_directive(
        build_system_prompt(
            SYSTEM_INSTRUCTION, render_spec(spec, cfg.spec_rendering.value), rendered
        ),
        ARGUMENT_INSTRUCTION,
    )
    return _assemble(system, context, template, cfg)


def build_monolithic_messages(
    catalog: SchemaCatalog,
    context: DialogueContext,
    template: ChatTemplate,
    cfg: PromptConfig,
    examples: Sequence[ExampleConversation] = (),
) -> list[ChatMessage]:
    """Single-stage prompt embedding every function's full spec.

    Raises:
        PromptError: If the catalog is empty or no user utterance is pending.
    """
    if not len(catalog):
        raise PromptError("Cannot prompt with an empty catalog")
    _require_pending(context)
    spec_block = "\n".join(
        render_spec(spec, cfg.spec_rendering.value) for spec in catalog.functions.values()
    )
    rendered = [render_example(example) for example in examples[: cfg.n_shot]]
    system = _with_directive(
        build_system_prompt(SYSTEM_INSTRUCTION, spec_block, rendered), MONOLITHIC_INSTRUCTION
    )
    return _assemble(system, context, template, cfg)


def _assemble(
    system: str,
    context: DialogueContext,
    template: ChatTemplate,
    cfg: PromptConfig,
) -> list[ChatMessage]:
    if cfg.unit_budget is not None:
        context = truncate_context(context, system, template, cfg)
    return [ChatMessage(Role.SYSTEM, system)] + serialize_context(
        context, cfg.include_prev_calls
    )


def truncate_context(
    context: DialogueContext,
    system: str,
    template: ChatTemplate,
    cfg: PromptConfig,
) -> DialogueContext:
    """Drop whole earliest turns until the rendered prompt fits ``cfg.unit_budget``.

    The pending user utterance is never dropped.
    """
    budget = cfg.unit_budget
    if budget is None:
        return context
    dropped = 0
    while len(context) > 1:
        messages = [ChatMessage(Role.SYSTEM, system)] + serialize_context(
            context, cfg.include_prev_calls
        )
        if count_prompt_units(apply_chat_template(messages, template)) <= budget:
            break
        context = context.drop_earliest(1)
        dropped += 1
    if dropped:
        log.debug("Dropped %d earliest turns to fit %d units", dropped, budget)
    return context


def load_examples(directory: Path, domains: Sequence[str]) -> dict[str, list[ExampleConversation]]:
    """Read per-domain example files named ``<function>.json``; missing files yield none.

    Raises:
        PromptError: If a file exists but is malformed.
    """
    examples: dict[str, list[ExampleConversation]] = {}
    for domain in domains:
        path = directory / f"{domain}.json"
        if not path.is_file():
            examples[domain] = []
            continue
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
            examples[domain] = [
                ExampleConversation(domain, DialogueContext.from_list(conversation))
                for conversation in raw
            ]
        except (OSError, ValueError, KeyError, TypeError, TrackerError) as exc:
            raise PromptError(f"Malformed example file {path}: {exc}") from exc
    return examples
