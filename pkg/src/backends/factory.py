"""Backend construction from configuration."""

from __future__ import annotations

import logging

from src.backends.base import Backend
from src.backends.mock import RuleBackend
from src.backends.openai_backend import OpenAIBackend
from src.backends.replay import record_mode, replay_mode
from src.config.models import BackendConfig, BackendMode
from src.exceptions import ConfigurationError

log = logging.getLogger(__name__)


def create_backend(config: BackendConfig) -> Backend:
    """Build the backend selected by ``config.mode``.

    Raises:
        ConfigurationError: If the mode's required settings are missing.
    """
    if config.mode is BackendMode.MOCK:
        if config.mock_script is None:
            raise ConfigurationError("Mock backend needs a mock script")
        log.info("[MOCK] Scripted replies from %s", config.mock_script)
        return RuleBackend.from_file(config.mock_script)

    if config.mode is BackendMode.REPLAY:
        if config.store_path is None:
            raise ConfigurationError("Replay backend needs a store path")
        log.info("[REPLAY] Serving completions from %s", config.store_path)
        return replay_mode(config.store_path)

    if not config.api_key:
        log.warning("No API key configured; the endpoint may reject requests")
    live = OpenAIBackend(
        base_url=config.base_url,
        api_key=config.api_key or "EMPTY",
        raw_completion=config.raw_completion,
        timeout=config.timeout,
    )
    if config.mode is BackendMode.RECORD:
        if config.store_path is None:
            raise ConfigurationError("Record backend needs a store path")
        log.info("[RECORD] Recording completions to %s", config.store_path)
        return record_mode(live, config.store_path)
    return live
