"""Data models for run configuration."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from src.backends.base import GenerationParams
from src.constants import (
    DEFAULT_CATALOG,
    DEFAULT_PARALLELISM,
    DEFAULT_PER_DOMAIN,
    DEFAULT_SEED,
    DEFAULT_TEMPLATE,
    DEFAULT_TIMEOUT_SECONDS,
    EXAMPLES_DIR,
)
from src.prompts.builder import PromptConfig


class BackendMode(str, Enum):
    LIVE = "live"
    RECORD = "record"
    REPLAY = "replay"
    MOCK = "mock"


class Fallback(str, Enum):
    """What stage two does when stage one selects nothing usable."""

    REUSE_PREVIOUS = "reuse_previous"
    NONE = "none"


@dataclass(frozen=True)
class BackendConfig:
    """Where completions come from."""

    mode: BackendMode = BackendMode.MOCK
    base_url: str | None = None
    model_id: str = ""
    api_key: str = field(default="", repr=False)
    params: GenerationParams = field(default_factory=GenerationParams)
    store_path: Path | None = None
    mock_script: Path | None = None
    raw_completion: bool = False
    timeout: float = DEFAULT_TIMEOUT_SECONDS


@dataclass(frozen=True)
class RunConfig:
    """Everything an evaluation, render or chat run needs."""

    backend: BackendConfig = field(default_factory=BackendConfig)
    prompt: PromptConfig = field(default_factory=PromptConfig)
    dataset_path: Path | None = None
    dataset_version: str = "2.1"
    catalog_path: Path = DEFAULT_CATALOG
    catalog_format: str = "native"
    examples_dir: Path = EXAMPLES_DIR
    template_name: str = DEFAULT_TEMPLATE
    fallback: Fallback = Fallback.REUSE_PREVIOUS
    output_dir: Path = Path("runs")
    seed: int = DEFAULT_SEED
    parallelism: int = DEFAULT_PARALLELISM
    end_to_end: bool = False
    domain_jga_all_turns: bool = False
    snap_enums: bool = False
    limit: int | None = None

    @property
    def n_shot(self) -> int:
        return self.prompt.n_shot

    @property
    def unit_budget(self) -> int | None:
        return self.prompt.unit_budget

    @property
    def manifest_path(self) -> Path:
        return self.output_dir / "manifest.jsonl"

    @property
    def report_path(self) -> Path:
        return self.output_dir / "report.json"

    @property
    def table_path(self) -> Path:
        return self.output_dir / "report.txt"


@dataclass(frozen=True)
class ExportConfig:
    """Parameters of a fine-tuning data export."""

    corpora: tuple[Path, ...]
    out_path: Path
    catalog_path: Path = DEFAULT_CATALOG
    corpus_format: str = "native"
    per_domain: int = DEFAULT_PER_DOMAIN
    seed: int = DEFAULT_SEED
    template_name: str = DEFAULT_TEMPLATE
    domains: tuple[str, ...] = ()
