"""The ``chat`` subcommand: track a conversation typed at the terminal."""

from __future__ import annotations

import logging
import sys
from typing import TextIO

from src.backends.factory import create_backend
from src.commands.common import load_catalog, load_template, tracker_config
from src.config.models import RunConfig
from src.constants import ExitCode
from src.core.dialogue import AssistantOutput, DialogueContext, DialogueState
from src.core.tracker import Tracker

log = logging.getLogger(__name__)

_HELP = "Commands: /state shows the tracked state, /reset starts over, /quit exits."


def _show_state(state: DialogueState, out: TextIO) -> None:
    out.write(f"state: {state.to_json()}\n")


def cmd_chat(config: RunConfig, stdin: TextIO | None = None, stdout: TextIO | None = None) -> int:
    """Read user lines, track each one and print the state and the reply.

    Backend failures are printed and the session goes on.
    """
    source = stdin or sys.stdin
    out = stdout or sys.stdout
    catalog = load_catalog(config)
    template = load_template(config.template_name)
    tracker = Tracker(tracker_config(config, create_backend(config.backend), catalog, template))

    context = DialogueContext()
    state = DialogueState()
    out.write(_HELP + "\n")
    for raw in source:
        line = raw.strip()
        if not line:
            continue
        if line == "/quit":
            break
        if line == "/reset":
            context, state = DialogueContext(), DialogueState()
            _show_state(state, out)
            continue
        if line == "/state":
            _show_state(state, out)
            continue

        context = context.with_user(line)
        result = tracker.track_turn(context, state)
        if result.error:
            out.write(f"error: {result.error}\n")
        for warning in result.warnings:
            log.debug("Warning: %s", warning)
        state = result.state_after
        if result.call is not None or result.response:
            context = context.answered(AssistantOutput(result.call, result.response))
        if result.selected_function:
            out.write(f"function: {result.selected_function}\n")
        _show_state(state, out)
        if result.response:
            out.write(f"assistant: {result.response}\n")
    return ExitCode.SUCCESS
