"""Configuration: one JSON document, loaded into dataclasses.

Relative paths are resolved against the directory of the config file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from datetime import timedelta
from pathlib import Path

from .benchmark import MatchThresholds
from .errors import ConfigError
from .ingest import IngestFilters
from .news import EditSelectionRule, SummarizerSpec
from .ranker import RANKS, RankConfig


@dataclass
class StorageConfig:
    path: str = "editnews.db"


@dataclass
class IngestConfig:
    endpoint: str | None = None
    stream_path: str | None = None
    window_minutes: int = 60
    max_pages: int = 500
    namespaces: list[int] | None = field(default_factory=lambda: [0])
    exclude_bots: bool = True
    host_delay_ms: int = 200
    retries: int = 3

    @property
    def filters(self) -> IngestFilters:
        ns = None if self.namespaces is None else frozenset(self.namespaces)
        return IngestFilters(namespaces=ns, exclude_bots=self.exclude_bots)


@dataclass
class StatsConfig:
    source: str | None = None


@dataclass
class DedupConfig:
    horizon_hours: float = 48

    @property
    def horizon(self) -> timedelta:
        return timedelta(hours=self.horizon_hours)


@dataclass
class BenchmarkConfig:
    threshold_min: float = 0.25
    threshold_strong: float = 0.33
    keyword_n: int = 10
    strength_mode: str = "jaccard"

    @property
    def thresholds(self) -> MatchThresholds:
        return MatchThresholds(self.threshold_min, self.threshold_strong)


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8080


@dataclass
class ScheduleConfig:
    interval_minutes: float = 15


@dataclass
class Config:
    storage: StorageConfig = field(default_factory=StorageConfig)
    ingest: IngestConfig = field(default_factory=IngestConfig)
    ranks: RankConfig = field(default_factory=RankConfig)
    selection: EditSelectionRule = field(default_factory=EditSelectionRule)
    summarizer: SummarizerSpec = field(default_factory=SummarizerSpec)
    stats: StatsConfig = field(default_factory=StatsConfig)
    dedup: DedupConfig = field(default_factory=DedupConfig)
    benchmark: BenchmarkConfig = field(default_factory=BenchmarkConfig)
    server: ServerConfig = field(default_factory=ServerConfig)
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)


def _build(cls, section: str, data):
    if not isinstance(data, dict):
        raise ConfigError(f"section {section!r} must be an object")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown keys in {section!r}: {sorted(unknown)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {section!r} section: {exc}") from exc


def _ranks(data) -> RankConfig:
    if not isinstance(data, dict):
        raise ConfigError("section 'ranks' must be an object")
    unknown = set(data) - {"weights", "threshold", "enabled"}
    if unknown:
        raise ConfigError(f"unknown keys in 'ranks': {sorted(unknown)}")
    weights = {name: 1.0 for name in RANKS}
    weights.update(data.get("weights", {}))
    enabled = data.get("enabled", list(RANKS))
    bad = [n for n in enabled if n not in RANKS]
    if bad:
        raise ConfigError(f"unknown ranks enabled: {bad}")
    try:
        return RankConfig(weights=weights, threshold=data.get("threshold", 1.0), enabled=enabled)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid 'ranks' section: {exc}") from exc


_SECTIONS = {
    "storage": StorageConfig,
    "ingest": IngestConfig,
    "selection": EditSelectionRule,
    "summarizer": SummarizerSpec,
    "stats": StatsConfig,
    "dedup": DedupConfig,
    "benchmark": BenchmarkConfig,
    "server": ServerConfig,
    "schedule": ScheduleConfig,
}


def config_from_dict(data: dict, base_dir: Path | None = None) -> Config:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - set(_SECTIONS) - {"ranks"}
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    parts = {name: _build(cls, name, data[name]) for name, cls in _SECTIONS.items() if name in data}
    if "ranks" in data:
        parts["ranks"] = _ranks(data["ranks"])
    cfg = Config(**parts)
    if base_dir is not None:
        _resolve_paths(cfg, Path(base_dir))
    return cfg


def _resolve(base: Path, value: str | None) -> str | None:
    if value is None or value == ":memory:" or value.startswith(("http://", "https://")):
        return value
    p = Path(value)
    return str(p if p.is_absolute() else base / p)


def _resolve_paths(cfg: Config, base: Path):
    cfg.storage.path = _resolve(base, cfg.storage.path)
    cfg.ingest.stream_path = _resolve(base, cfg.ingest.stream_path)
    cfg.stats.source = _resolve(base, cfg.stats.source)


def load_config(path) -> Config:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc.msg}") from None
    return config_from_dict(data, base_dir=path.parent)
