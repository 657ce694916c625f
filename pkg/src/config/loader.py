"""Merging config files, environment and flags into run configurations."""

from __future__ import annotations

import json
import logging
import os
import tomllib
from collections.abc import Mapping
from dataclasses import fields
from pathlib import Path
from typing import Any

from src.backends.base import GenerationParams
from src.config.models import BackendConfig, BackendMode, ExportConfig, Fallback, RunConfig
from src.config.validators import parse_flag, validate_run_config
from src.constants import API_KEY_ENV, BASE_URL_ENV
from src.exceptions import BackendError, ConfigurationError, PromptError
from src.prompts.builder import Mode, PromptConfig, SpecRendering

log = logging.getLogger(__name__)

# Settings a config file may set; names match the CLI option destinations.
RUN_KEYS = frozenset(
    {
        "dataset",
        "dataset_version",
        "catalog",
        "catalog_format",
        "examples_dir",
        "template",
        "mode",
        "spec_rendering",
        "n_shot",
        "prev_calls",
        "oracle_domain",
        "unit_budget",
        "backend",
        "store",
        "mock_script",
        "base_url",
        "model",
        "api_key",
        "temperature",
        "top_p",
        "max_tokens",
        "raw_completion",
        "timeout",
        "fallback",
        "output_dir",
        "seed",
        "parallelism",
        "end_to_end",
        "all_turns_domain_jga",
        "snap_enums",
        "limit",
    }
)
EXPORT_KEYS = frozenset(
    {"corpora", "out", "catalog", "corpus_format", "per_domain", "seed", "template", "domains"}
)
CONFIG_KEYS = RUN_KEYS | EXPORT_KEYS


def load_config_file(path: Path) -> dict[str, Any]:
    """Read flat settings from a ``.json`` or ``.toml`` file.

    Raises:
        ConfigurationError: If the file is unreadable, malformed, nested or
            sets an unknown key.
    """
    try:
        if path.suffix == ".toml":
            with path.open("rb") as handle:
                raw: Any = tomllib.load(handle)
        else:
            raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigurationError(f"Cannot read config file {path}: {exc}") from exc
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"Malformed config file {path}: {exc}") from exc

    if not isinstance(raw, dict):
        raise ConfigurationError(f"Config file {path} must hold a table of settings")
    settings = {key.replace("-", "_"): value for key, value in raw.items()}
    unknown = sorted(set(settings) - CONFIG_KEYS)
    if unknown:
        raise ConfigurationError(f"Unknown config keys in {path}: {', '.join(unknown)}")
    nested = sorted(key for key, value in settings.items() if isinstance(value, dict))
    if nested:
        raise ConfigurationError(f"Config keys must be flat in {path}: {', '.join(nested)}")
    log.debug("Loaded %d settings from %s", len(settings), path)
    return settings


def env_settings(environ: Mapping[str, str] | None = None) -> dict[str, Any]:
    """Settings taken from ``FNCTOD_API_KEY`` and ``FNCTOD_BASE_URL``."""
    env = os.environ if environ is None else environ
    settings: dict[str, Any] = {}
    if env.get(API_KEY_ENV):
        settings["api_key"] = env[API_KEY_ENV]
    if env.get(BASE_URL_ENV):
        settings["base_url"] = env[BASE_URL_ENV]
    return settings


def merge_settings(*layers: Mapping[str, Any]) -> dict[str, Any]:
    """Later layers win; ``None`` values never override."""
    merged: dict[str, Any] = {}
    for layer in layers:
        merged.update({key: value for key, value in layer.items() if value is not None})
    return merged


def _path(value: Any) -> Path | None:
    return None if value is None else Path(value)


def _enum(kind: type[Any], value: Any, key: str) -> Any:
    try:
        return kind(value)
    except ValueError:
        choices = ", ".join(member.value for member in kind)
        raise ConfigurationError(f"Invalid {key} '{value}' (choose from {choices})") from None


def build_run_config(settings: Mapping[str, Any], *, needs_backend: bool = True) -> RunConfig:
    """Build and validate a run configuration from merged settings.

    Raises:
        ConfigurationError: If a value has the wrong type or the result is
            inconsistent.
    """
    s = settings
    defaults = {f.name: f.default for f in fields(RunConfig) if f.init}
    base_params = GenerationParams()
    try:
        params = GenerationParams(
            temperature=float(s.get("temperature", base_params.temperature)),
            top_p=float(s.get("top_p", base_params.top_p)),
            max_tokens=int(s.get("max_tokens", base_params.max_tokens)),
        )
        prompt = PromptConfig(
            mode=_enum(Mode, s.get("mode", Mode.DECOMPOSED.value), "mode"),
            spec_rendering=_enum(
                SpecRendering, s.get("spec_rendering", SpecRendering.JSON.value), "spec rendering"
            ),
            n_shot=int(s.get("n_shot", 0)),
            include_prev_calls=parse_flag(s.get("prev_calls", True), "prev_calls"),
            oracle_domain=s.get("oracle_domain"),
            unit_budget=None if s.get("unit_budget") is None else int(s["unit_budget"]),
        )
        backend = BackendConfig(
            mode=_enum(BackendMode, s.get("backend", BackendMode.MOCK.value), "backend"),
            base_url=s.get("base_url"),
            model_id=str(s.get("model", "")),
            api_key=str(s.get("api_key", "")),
            params=params,
            store_path=_path(s.get("store")),
            mock_script=_path(s.get("mock_script")),
            raw_completion=parse_flag(s.get("raw_completion", False), "raw_completion"),
            timeout=float(s.get("timeout", BackendConfig.timeout)),
        )
        config = RunConfig(
            backend=backend,
            prompt=prompt,
            dataset_path=_path(s.get("dataset")),
            dataset_version=str(s.get("dataset_version", defaults["dataset_version"])),
            catalog_path=Path(s.get("catalog", defaults["catalog_path"])),
            catalog_format=str(s.get("catalog_format", defaults["catalog_format"])),
            examples_dir=Path(s.get("examples_dir", defaults["examples_dir"])),
            template_name=str(s.get("template", defaults["template_name"])),
            fallback=_enum(Fallback, s.get("fallback", Fallback.REUSE_PREVIOUS.value), "fallback"),
            output_dir=Path(s.get("output_dir", "runs")),
            seed=int(s.get("seed", defaults["seed"])),
            parallelism=int(s.get("parallelism", defaults["parallelism"])),
            end_to_end=parse_flag(s.get("end_to_end", False), "end_to_end"),
            domain_jga_all_turns=parse_flag(
                s.get("all_turns_domain_jga", False), "all_turns_domain_jga"
            ),
            snap_enums=parse_flag(s.get("snap_enums", False), "snap_enums"),
            limit=None if s.get("limit") is None else int(s["limit"]),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"Invalid setting: {exc}") from exc
    except (BackendError, PromptError) as exc:
        raise ConfigurationError(str(exc)) from exc
    validate_run_config(config, needs_backend=needs_backend)
    return config


def build_export_config(settings: Mapping[str, Any]) -> ExportConfig:
    """Build an export configuration from merged settings.

    Raises:
        ConfigurationError: If no corpus or output path is given, or a value
            has the wrong type.
    """
    s = settings
    corpora = tuple(Path(p) for p in s.get("corpora") or ())
    if not corpora:
        raise ConfigurationError("Export needs at least one corpus")
    if s.get("out") is None:
        raise ConfigurationError("Export needs --out")
    defaults = {f.name: f.default for f in fields(ExportConfig) if f.init}
    try:
        config = ExportConfig(
            corpora=corpora,
            out_path=Path(s["out"]),
            catalog_path=Path(s.get("catalog", defaults["catalog_path"])),
            corpus_format=str(s.get("corpus_format", defaults["corpus_format"])),
            per_domain=int(s.get("per_domain", defaults["per_domain"])),
            seed=int(s.get("seed", defaults["seed"])),
            template_name=str(s.get("template", defaults["template_name"])),
            domains=tuple(str(d) for d in s.get("domains") or ()),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"Invalid setting: {exc}") from exc
    if config.per_domain < 1:
        raise ConfigurationError(f"--per-domain must be >= 1, got {config.per_domain}")
    if config.corpus_format not in ("native", "sgd"):
        raise ConfigurationError(f"Unknown corpus format '{config.corpus_format}'")
    return config
