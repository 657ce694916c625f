"""Input validation for schema identifiers and run configuration."""

from __future__ import annotations

import re
from typing import TYPE_CHECKING

from src.exceptions import ConfigurationError, SchemaValidationError

if TYPE_CHECKING:
    from src.config.models import RunConfig

_IDENTIFIER_RE = re.compile(r"^[a-z0-9_]+$")

_MAX_IDENTIFIER_LENGTH = 64

_STORE_MODES = ("record", "replay")

_DATASET_VERSIONS = ("2.1", "2.2")

_TRUE_WORDS = frozenset({"1", "true", "yes", "on"})
_FALSE_WORDS = frozenset({"0", "false", "no", "off", ""})


def validate_identifier(name: str, kind: str = "slot") -> None:
    """Validate that a slot or function name is lowercase without whitespace.

    Raises:
        SchemaValidationError: If the name is malformed.
    """
    if not name:
        raise SchemaValidationError(f"Empty {kind} name")
    if len(name) > _MAX_IDENTIFIER_LENGTH:
        raise SchemaValidationError(
            f"{kind.capitalize()} name too long (max {_MAX_IDENTIFIER_LENGTH}): {name}"
        )
    if not _IDENTIFIER_RE.match(name):
        raise SchemaValidationError(
            f"Invalid {kind} name '{name}': use lowercase letters, digits and underscores"
        )


def parse_flag(value: object, name: str) -> bool:
    """Read a boolean setting given as a bool, 0/1, or a word like "false" or "yes".

    Raises:
        ConfigurationError: If the value is not a recognizable boolean.
    """
    if isinstance(value, bool):
        return value
    if isinstance(value, int) and value in (0, 1):
        return bool(value)
    if isinstance(value, str):
        word = value.strip().lower()
        if word in _TRUE_WORDS:
            return True
        if word in _FALSE_WORDS:
            return False
    raise ConfigurationError(f"Setting '{name}' must be true or false, got {value!r}")


def canonical_identifier(raw: str) -> str:
    """Fold a dataset slot key into identifier form ('book day' -> 'book_day')."""
    return re.sub(r"[\s\-]+", "_", raw.strip().lower())


def validate_run_config(config: RunConfig, *, needs_backend: bool = True) -> None:
    """Check cross-field consistency of a run configuration.

    Backend mode requirements are skipped when ``needs_backend`` is false
    (``render`` and ``report`` never call a model).

    Raises:
        ConfigurationError: If the configuration is inconsistent.
    """
    backend = config.backend
    if needs_backend:
        if backend.mode in _STORE_MODES and backend.store_path is None:
            raise ConfigurationError(f"Backend mode '{backend.mode.value}' requires --store")
        if backend.mode == "mock" and backend.mock_script is None:
            raise ConfigurationError("Backend mode 'mock' requires --mock-script")
        if backend.mode in ("live", "record") and not backend.model_id:
            raise ConfigurationError(f"Backend mode '{backend.mode.value}' requires --model")

    params = backend.params
    if params.temperature < 0:
        raise ConfigurationError(f"temperature must be >= 0, got {params.temperature}")
    if not 0 < params.top_p <= 1:
        raise ConfigurationError(f"top_p must be in (0, 1], got {params.top_p}")
    if params.max_tokens < 1:
        raise ConfigurationError(f"max_tokens must be >= 1, got {params.max_tokens}")

    if config.n_shot < 0:
        raise ConfigurationError(f"--n-shot must be >= 0, got {config.n_shot}")
    if config.parallelism < 1:
        raise ConfigurationError(f"--parallelism must be >= 1, got {config.parallelism}")
    if config.unit_budget is not None and config.unit_budget < 1:
        raise ConfigurationError(f"--unit-budget must be >= 1, got {config.unit_budget}")
    if config.limit is not None and config.limit < 1:
        raise ConfigurationError(f"--limit must be >= 1, got {config.limit}")
    if config.dataset_version not in _DATASET_VERSIONS:
        raise ConfigurationError(
            f"Unsupported dataset version '{config.dataset_version}' (use 2.1 or 2.2)"
        )
