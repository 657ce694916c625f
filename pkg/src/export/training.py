"""Sampling dialogues and emitting fine-tuning records with loss-mask spans."""

from __future__ import annotations

import logging
import random
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from src.constants import FUNCTION_CALL_CLOSE, FUNCTION_CALL_OPEN, SYSTEM_INSTRUCTION
from src.core.schema import SchemaCatalog, render_spec
from src.exceptions import ExportError
from src.export.corpus import CorpusDialogue
from src.prompts.builder import SpecRendering, build_system_prompt, render_call, serialize_context
from src.prompts.templates import ChatMessage, ChatTemplate, Role, apply_chat_template
from src.utils.filesystem import write_jsonl

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainingRecord:
    """A rendered training conversation and the byte spans the loss covers."""

    text: str
    mask_spans: tuple[tuple[int, int], ...]
    corpus: str
    dialogue_id: str

    def __post_init__(self) -> None:
        encoded = self.text.encode("utf-8")
        end = 0
        for offset, length in self.mask_spans:
            if offset < end or offset + length > len(encoded):
                raise ExportError(f"{self.dialogue_id}: mask span ({offset}, {length}) is invalid")
            span = encoded[offset : offset + length].decode("utf-8")
            if not (span.startswith(FUNCTION_CALL_OPEN) and span.endswith(FUNCTION_CALL_CLOSE)):
                raise ExportError(f"{self.dialogue_id}: mask span does not cover a function call")
            end = offset + length

    def span_texts(self) -> list[str]:
        encoded = self.text.encode("utf-8")
        return [encoded[o : o + n].decode("utf-8") for o, n in self.mask_spans]

    def to_dict(self) -> dict[str, Any]:
        return {
            "text": self.text,
            "mask_spans": [list(span) for span in self.mask_spans],
            "source": {"corpus": self.corpus, "dialogue_id": self.dialogue_id},
        }


def sample_dialogues(
    corpora: Sequence[Sequence[CorpusDialogue]],
    per_domain: int,
    seed: int,
    domains: Sequence[str] = (),
) -> list[CorpusDialogue]:
    """Draw up to ``per_domain`` dialogues per domain without replacement.

    Domains are visited in sorted order with one seeded generator. A dialogue
    touching several domains counts toward each quota and is kept once.
    ``domains`` limits the export to the listed functions when non-empty.

    Raises:
        ExportError: If ``per_domain`` is below 1.
    """
    if per_domain < 1:
        raise ExportError(f"per_domain must be >= 1, got {per_domain}")

    pools: dict[str, list[CorpusDialogue]] = {}
    for corpus in corpora:
        for dialogue in corpus:
            for domain in dialogue.domains:
                pools.setdefault(domain, []).append(dialogue)
    wanted = sorted(set(domains)) if domains else sorted(pools)

    rng = random.Random(seed)
    chosen: dict[tuple[str, str], CorpusDialogue] = {}
    for domain in wanted:
        pool = sorted(pools.get(domain, []), key=lambda d: (d.corpus, d.dialogue_id))
        if not pool:
            log.warning("No dialogues for domain %s; skipped", domain)
            continue
        if len(pool) < per_domain:
            log.warning("Domain %s has %d of %d dialogues", domain, len(pool), per_domain)
        for dialogue in rng.sample(pool, min(per_domain, len(pool))):
            chosen.setdefault((dialogue.corpus, dialogue.dialogue_id), dialogue)
    log.info("Sampled %d dialogues over %d domains", len(chosen), len(wanted))
    return list(chosen.values())


def _render(
    dialogue: CorpusDialogue, catalog: SchemaCatalog, template: ChatTemplate
) -> TrainingRecord:
    specs = "\n".join(
        render_spec(catalog.get(name), SpecRendering.JSON.value) for name in dialogue.domains
    )
    messages = [ChatMessage(Role.SYSTEM, build_system_prompt(SYSTEM_INSTRUCTION, specs, []))]
    messages.extend(serialize_context(dialogue.context, include_prev_calls=True))
    text = apply_chat_template(messages, template)
    if template.generation_cue and text.endswith(template.generation_cue):
        text = text[: -len(template.generation_cue)]

    spans = []
    cursor = 0
    for turn in dialogue.context.turns:
        if turn.assistant is None or turn.assistant.call is None:
            continue
        rendered = render_call(turn.assistant)
        start = text.find(rendered, cursor)
        if start < 0:
            raise ExportError(f"{dialogue.dialogue_id}: call span not found in rendered text")
        offset = len(text[:start].encode("utf-8"))
        spans.append((offset, len(rendered.encode("utf-8"))))
        cursor = start + len(rendered)
    return TrainingRecord(text, tuple(spans), dialogue.corpus, dialogue.dialogue_id)


def emit_training_examples(
    dialogues: Sequence[CorpusDialogue],
    catalog: SchemaCatalog,
    template: ChatTemplate,
) -> list[TrainingRecord]:
    """Render each dialogue with the specs of the functions it invokes and no
    demonstrations; dialogues calling unknown functions are skipped."""
    records = []
    for dialogue in dialogues:
        unknown = [name for name in dialogue.domains if name not in catalog]
        if unknown:
            log.warning(
                "Skipping %s/%s: unknown functions %s",
                dialogue.corpus,
                dialogue.dialogue_id,
                ", ".join(unknown),
            )
            continue
        records.append(_render(dialogue, catalog, template))
    return records


def write_training_records(path: Path, records: Sequence[TrainingRecord]) -> int:
    """Write records as JSON lines; returns the count written."""
    return write_jsonl(path, (record.to_dict() for record in records))
