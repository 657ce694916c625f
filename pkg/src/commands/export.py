"""The ``export`` subcommand: fine-tuning records from dialogue corpora."""

from __future__ import annotations

import logging
from pathlib import Path

from src.commands.common import load_template
from src.config.models import ExportConfig
from src.constants import ExitCode
from src.core.schema import load_catalog_file
from src.export.corpus import (
    CorpusDialogue,
    load_native_corpus,
    load_sgd_corpus,
    sgd_schema_to_catalog,
)
from src.export.training import emit_training_examples, sample_dialogues, write_training_records
from src.utils.filesystem import read_json

log = logging.getLogger(__name__)


def _load_corpus(path: Path, corpus_format: str) -> list[CorpusDialogue]:
    if corpus_format == "sgd":
        return load_sgd_corpus(path, corpus=path.stem)
    return load_native_corpus(path)


def cmd_export(config: ExportConfig) -> int:
    """Sample, render and write training records.

    SGD exports read ``catalog_path`` as an SGD ``schema.json``.

    Raises:
        TrackerError: If a corpus, the catalog or the template cannot be loaded.
    """
    if config.corpus_format == "sgd":
        catalog = sgd_schema_to_catalog(read_json(config.catalog_path))
    else:
        catalog = load_catalog_file(config.catalog_path)
    template = load_template(config.template_name)
    corpora = [_load_corpus(path, config.corpus_format) for path in config.corpora]
    sampled = sample_dialogues(corpora, config.per_domain, config.seed, config.domains)
    records = emit_training_examples(sampled, catalog, template)
    written = write_training_records(config.out_path, records)
    log.info("[OK] Exported %d training records to %s", written, config.out_path)
    return ExitCode.SUCCESS
