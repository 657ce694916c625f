"""The ``evaluate`` and ``report`` subcommands."""

from __future__ import annotations

import logging
import sys
from pathlib import Path

from src.backends.factory import create_backend
from src.commands.common import (
    load_catalog,
    load_gold,
    load_template,
    tracker_config,
    user_turns,
)
from src.config.models import RunConfig
from src.constants import ExitCode
from src.core.tracker import manifest_record, run_dialogues
from src.evaluation.report import EvalReport, build_report, load_manifest
from src.utils.filesystem import write_jsonl, write_text

log = logging.getLogger(__name__)


def _write_report(report: EvalReport, config: RunConfig) -> None:
    write_text(config.report_path, report.to_json())
    table = report.render_table()
    write_text(config.table_path, table)
    sys.stdout.write(table)


def cmd_evaluate(config: RunConfig) -> int:
    """Track every gold dialogue, then write the manifest and the report.

    Everything that can be checked locally (catalog, template, examples,
    dataset) is loaded before the backend is built.

    Raises:
        TrackerError: On configuration, dataset or coverage problems.
    """
    catalog = load_catalog(config)
    template = load_template(config.template_name)
    golds, goals = load_gold(config, catalog)
    backend = create_backend(config.backend)
    tracker_cfg = tracker_config(config, backend, catalog, template)

    log.info(
        "Tracking %d dialogues (%s, %d-shot, parallelism %d)",
        len(golds),
        config.prompt.mode.value,
        config.n_shot,
        config.parallelism,
    )
    results = run_dialogues(
        [(d.dialogue_id, user_turns(d)) for d in golds], tracker_cfg, config.parallelism
    )
    records = [
        manifest_record(dialogue_id, turn, result)
        for dialogue_id, turn_results in results
        for turn, result in enumerate(turn_results)
    ]
    failed = sum(1 for r in records if r["error"])
    if failed:
        log.warning("%d of %d turns failed at the backend", failed, len(records))
    write_jsonl(config.manifest_path, records)

    report = build_report(
        records,
        golds,
        goals if config.end_to_end else [],
        catalog,
        all_turns=config.domain_jga_all_turns,
    )
    _write_report(report, config)
    return ExitCode.SUCCESS


def cmd_report(config: RunConfig, manifest: Path) -> int:
    """Rebuild the report from an existing manifest without any backend call."""
    catalog = load_catalog(config)
    golds, goals = load_gold(config, catalog)
    records = load_manifest(manifest)
    report = build_report(
        records,
        golds,
        goals if config.end_to_end else [],
        catalog,
        all_turns=config.domain_jga_all_turns,
    )
    _write_report(report, config)
    return ExitCode.SUCCESS
