"""Resource loading shared by the subcommands."""

from __future__ import annotations

import logging
from pathlib import Path

from src.backends.base import Backend
from src.config.models import RunConfig
from src.constants import TEMPLATE_REGISTRY
from src.core.schema import SchemaCatalog, load_catalog_file
from src.core.tracker import TrackerConfig, UserTurn
from src.evaluation.dataset import GoldDialogue, UserGoal, load_multiwoz
from src.exceptions import ConfigurationError
from src.prompts.builder import load_examples
from src.prompts.templates import ChatTemplate, TemplateRegistry

log = logging.getLogger(__name__)


def load_catalog(config: RunConfig) -> SchemaCatalog:
    catalog = load_catalog_file(config.catalog_path, config.catalog_format)
    log.debug("Catalog %s: %s", config.catalog_path, ", ".join(catalog.names))
    return catalog


def load_template(name: str, registry_path: Path = TEMPLATE_REGISTRY) -> ChatTemplate:
    return TemplateRegistry.load(registry_path).get(name)


def require_dataset(config: RunConfig) -> Path:
    """Raises:
    ConfigurationError: If no dataset path is configured.
    """
    if config.dataset_path is None:
        raise ConfigurationError("This command needs --dataset")
    return config.dataset_path


def load_gold(
    config: RunConfig, catalog: SchemaCatalog
) -> tuple[list[GoldDialogue], list[UserGoal]]:
    """Gold dialogues and their goals, cut to ``config.limit`` dialogues."""
    dialogues, goals = load_multiwoz(
        require_dataset(config), config.dataset_version, catalog=catalog
    )
    if config.limit is not None:
        dialogues = dialogues[: config.limit]
        kept = {d.dialogue_id for d in dialogues}
        goals = [g for g in goals if g.dialogue_id in kept]
    return dialogues, goals


def user_turns(dialogue: GoldDialogue) -> list[UserTurn]:
    return [UserTurn(turn.user, turn.response or None) for turn in dialogue.turns]


def tracker_config(
    config: RunConfig, backend: Backend, catalog: SchemaCatalog, template: ChatTemplate
) -> TrackerConfig:
    """Assemble the tracker configuration; examples are read only when needed."""
    examples = load_examples(config.examples_dir, catalog.names) if config.n_shot else {}
    return TrackerConfig(
        prompt=config.prompt,
        backend=backend,
        template=template,
        catalog=catalog,
        examples=examples,
        fallback=config.fallback,
        params=config.backend.params,
        model_id=config.backend.model_id,
        raw_completion=config.backend.raw_completion,
        snap_enums=config.snap_enums,
        end_to_end=config.end_to_end,
    )
