#!/usr/bin/env python3
"""Zero-shot dialogue state tracking through function calling.

Runs the two-stage (function selection, then argument generation) tracker
over MultiWOZ, inspects its prompts, chats with it, and exports fine-tuning
data in the same function-calling format.

Usage:
    python3 dst.py evaluate --dataset DIR [--mode decomposed|monolithic]
                            [--backend live|record|replay|mock] [...]
    python3 dst.py render   --dataset DIR --dialogue-id ID --turn N [...]
    python3 dst.py chat     [--backend live|mock] [...]
    python3 dst.py report   --dataset DIR --manifest FILE [...]
    python3 dst.py export   --corpus FILE [--corpus FILE ...] --out FILE

Example:
    python3 dst.py evaluate --dataset data/MultiWOZ_2.1 --backend live \\
        --model gpt-3.5-turbo --n-shot 5 --output-dir runs/gpt35
    python3 dst.py export --corpus corpora/sgd.json --per-domain 200 --out train.jsonl
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any

from src.config.loader import (
    build_export_config,
    build_run_config,
    env_settings,
    load_config_file,
    merge_settings,
)
from src.constants import ExitCode
from src.exceptions import ConfigurationError, TrackerError

log = logging.getLogger("dst")


def _configure_logging(level: str) -> None:
    """Set up structured logging to stderr."""
    numeric = getattr(logging, level.upper(), None)
    if not isinstance(numeric, int):
        print(f"Invalid log level: {level}", file=sys.stderr)
        sys.exit(ExitCode.USAGE_ERROR)
    logging.basicConfig(
        level=numeric,
        format="%(asctime)s [%(levelname)s] %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        stream=sys.stderr,
    )


class _Once(argparse.Action):
    """Store a value, rejecting a second occurrence of the option."""

    def __call__(
        self,
        parser: argparse.ArgumentParser,
        namespace: argparse.Namespace,
        values: Any,
        option_string: str | None = None,
    ) -> None:
        seen = getattr(namespace, "_seen_once", set())
        if self.dest in seen:
            parser.error(f"{option_string} given more than once")
        seen.add(self.dest)
        namespace._seen_once = seen
        setattr(namespace, self.dest, values)


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="JSON or TOML settings file")
    common.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging verbosity (default: INFO)",
    )
    common.add_argument("--catalog", default=None, help="Function catalog file")
    common.add_argument("--template", default=None, help="Chat template name (default: plain)")
    common.add_argument("--seed", type=int, default=None, help="Seed for all randomness")
    return common


def _run_options() -> argparse.ArgumentParser:
    run = argparse.ArgumentParser(add_help=False)
    data = run.add_argument_group("data")
    data.add_argument("--dataset", default=None, help="MultiWOZ directory")
    data.add_argument("--dataset-version", default=None, choices=["2.1", "2.2"])
    data.add_argument(
        "--catalog-format", default=None, choices=["native", "multiwoz_ontology"]
    )
    data.add_argument("--examples-dir", default=None, help="Per-domain example conversations")
    data.add_argument("--limit", type=int, default=None, help="Only the first N dialogues")

    prompt = run.add_argument_group("prompt")
    prompt.add_argument("--mode", action=_Once, default=None, choices=["decomposed", "monolithic"])
    prompt.add_argument("--spec-rendering", default=None, choices=["json", "text"])
    prompt.add_argument("--n-shot", type=int, default=None, help="Example conversations per prompt")
    prompt.add_argument(
        "--no-prev-calls",
        dest="prev_calls",
        action="store_false",
        default=None,
        help="Omit earlier function calls from the conversation",
    )
    prompt.add_argument("--oracle-domain", default=None, help="Skip selection; use this function")
    prompt.add_argument("--unit-budget", type=int, default=None, help="Truncate context to N units")
    prompt.add_argument("--fallback", default=None, choices=["reuse_previous", "none"])

    backend = run.add_argument_group("backend")
    backend.add_argument("--backend", default=None, choices=["live", "record", "replay", "mock"])
    backend.add_argument("--store", default=None, help="Record/replay store (JSON lines)")
    backend.add_argument("--mock-script", default=None, help="Mock reply rules (JSON)")
    backend.add_argument("--base-url", default=None, help="OpenAI-compatible endpoint")
    backend.add_argument("--model", default=None, help="Model id")
    backend.add_argument("--temperature", type=float, default=None)
    backend.add_argument("--top-p", type=float, default=None)
    backend.add_argument("--max-tokens", type=int, default=None)
    backend.add_argument("--timeout", type=float, default=None, help="Seconds per request")
    backend.add_argument(
        "--raw-completion",
        action="store_true",
        default=None,
        help="Send the templated prompt to the completions endpoint",
    )

    evaluation = run.add_argument_group("evaluation")
    evaluation.add_argument("--output-dir", default=None, help="Manifest and report directory")
    evaluation.add_argument("--parallelism", type=int, default=None)
    evaluation.add_argument(
        "--end-to-end",
        action="store_true",
        default=None,
        help="Feed generated responses back as context and score Success",
    )
    evaluation.add_argument(
        "--all-turns-domain-jga",
        action="store_true",
        default=None,
        help="Count every turn in per-domain JGA, not only turns where the domain is active",
    )
    evaluation.add_argument(
        "--snap-enums",
        action="store_true",
        default=None,
        help="Snap near-miss categorical values to the closest allowed value",
    )
    return run


def build_parser() -> argparse.ArgumentParser:
    """Construct the argument parser."""
    parser = argparse.ArgumentParser(
        description="Zero-shot dialogue state tracking via function calling.",
        epilog="Example: python3 dst.py evaluate --dataset data/MultiWOZ_2.1 --backend mock "
        "--mock-script replies.json",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_options()
    run = _run_options()

    sub.add_parser("evaluate", parents=[common, run], help="Track a dataset and score it")

    render = sub.add_parser("render", parents=[common, run], help="Print one turn's prompts")
    render.add_argument("--dialogue-id", required=True)
    render.add_argument("--turn", type=int, required=True)

    sub.add_parser("chat", parents=[common, run], help="Track a conversation typed at stdin")

    report = sub.add_parser("report", parents=[common, run], help="Rebuild a report")
    report.add_argument("--manifest", type=Path, required=True, help="Run manifest to score")

    export = sub.add_parser("export", parents=[common], help="Write fine-tuning records")
    export.add_argument(
        "--corpus", dest="corpora", action="append", default=None, help="Corpus file (repeatable)"
    )
    export.add_argument("--corpus-format", default=None, choices=["native", "sgd"])
    export.add_argument("--per-domain", type=int, default=None)
    export.add_argument(
        "--domain", dest="domains", action="append", default=None, help="Only these functions"
    )
    export.add_argument("--out", default=None, help="Output JSON-lines file")
    return parser


_NON_SETTINGS = frozenset(
    {"command", "config", "log_level", "dialogue_id", "turn", "manifest", "_seen_once"}
)


def _settings(args: argparse.Namespace) -> dict[str, Any]:
    """Defaults < config file < environment < flags."""
    flags = {k: v for k, v in vars(args).items() if k not in _NON_SETTINGS}
    from_file = load_config_file(args.config) if args.config else {}
    return merge_settings(from_file, env_settings(), flags)


def _dispatch(args: argparse.Namespace) -> int:
    settings = _settings(args)
    if args.command == "export":
        from src.commands.export import cmd_export

        return cmd_export(build_export_config(settings))

    config = build_run_config(settings, needs_backend=args.command in ("evaluate", "chat"))
    if args.command == "evaluate":
        from src.commands.evaluate import cmd_evaluate

        return cmd_evaluate(config)
    if args.command == "report":
        from src.commands.evaluate import cmd_report

        return cmd_report(config, args.manifest)
    if args.command == "render":
        from src.commands.render import cmd_render

        return cmd_render(config, args.dialogue_id, args.turn)
    from src.commands.chat import cmd_chat

    return cmd_chat(config)


def main(argv: list[str] | None = None) -> int:
    """Main entry point. Returns an exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return ExitCode.SUCCESS if exc.code in (0, None) else ExitCode.USAGE_ERROR

    _configure_logging(args.log_level)

    try:
        return _dispatch(args)
    except ConfigurationError as exc:
        log.error("%s", exc)
        return ExitCode.USAGE_ERROR
    except TrackerError as exc:
        log.error("%s", exc)
        return ExitCode.RUNTIME_ERROR


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\nAborted.", file=sys.stderr)
        sys.exit(ExitCode.RUNTIME_ERROR)
    except Exception as exc:
        log.error("Fatal error: %s", exc, exc_info=log.isEnabledFor(logging.DEBUG))
        sys.exit(ExitCode.RUNTIME_ERROR)
