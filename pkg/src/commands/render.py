"""The ``render`` subcommand: print the exact prompts of one gold turn."""

from __future__ import annotations

import logging
import sys

from src.commands.common import load_catalog, load_gold, load_template
from src.config.models import RunConfig
from src.constants import ExitCode
from src.core.dialogue import DialogueContext
from src.exceptions import DatasetError
from src.export.corpus import from_gold_dialogue
from src.prompts.builder import (
    Mode,
    build_argument_messages,
    build_monolithic_messages,
    build_selection_messages,
    interleave_examples,
    load_examples,
)
from src.prompts.templates import apply_chat_template

log = logging.getLogger(__name__)


def _block(title: str, text: str) -> str:
    return f"===== {title} =====\n{text}\n"


def cmd_render(config: RunConfig, dialogue_id: str, turn: int) -> int:
    """Print the stage prompts for ``turn`` of ``dialogue_id``, with gold history.

    Earlier turns carry their gold calls and responses. Stage two uses the
    oracle domain when set, else the gold turn domain.

    Raises:
        DatasetError: If the dialogue or turn does not exist.
    """
    catalog = load_catalog(config)
    template = load_template(config.template_name)
    golds, _ = load_gold(config, catalog)
    dialogue = next((d for d in golds if d.dialogue_id == dialogue_id), None)
    if dialogue is None:
        raise DatasetError(f"Unknown dialogue id: {dialogue_id}")
    if not 0 <= turn < len(dialogue.turns):
        raise DatasetError(f"{dialogue_id} has no turn {turn} (0..{len(dialogue.turns) - 1})")

    history = from_gold_dialogue(dialogue).context
    context = DialogueContext(history.turns[:turn]).with_user(dialogue.turns[turn].user)
    examples = load_examples(config.examples_dir, catalog.names) if config.n_shot else {}
    prompt = config.prompt

    blocks = []
    if prompt.mode is Mode.MONOLITHIC:
        demos = interleave_examples(examples, catalog.names)
        messages = build_monolithic_messages(catalog, context, template, prompt, demos)
        blocks.append(_block("monolithic", apply_chat_template(messages, template)))
    else:
        if prompt.oracle_domain is None:
            messages = build_selection_messages(catalog, context, template, prompt)
            blocks.append(_block("selection", apply_chat_template(messages, template)))
        function = prompt.oracle_domain or dialogue.turns[turn].turn_domain
        if function is None:
            log.warning("Turn %d has no gold domain; argument prompt not rendered", turn)
        else:
            messages = build_argument_messages(
                catalog.get(function), context, examples.get(function, ()), template, prompt
            )
            text = apply_chat_template(messages, template)
            blocks.append(_block(f"arguments: {function}", text))
    sys.stdout.write("\n".join(blocks))
    return ExitCode.SUCCESS

