"""Learner settings and config-file loading."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Mapping

from .gentree import DistanceParams


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class LearnConfig:
    depth: int = 3
    top_k: int = 3
    delimiter_support: float = 0.8
    # list separators may be missing from one-item values
    separator_support: float = 0.2
    indel_cost: float = 4.0
    unalign_cost: float = 4.0
    beta: float = 1.0
    class_weight: float = 0.5
    enum_threshold: int = 5
    enum_min_support: int = 2
    refine: bool = True
    # structure search runs on at most this many distinct values per level
    sample_size: int = 40
    # pairwise vertical distances use a smaller sample
    vertical_sample: int = 12
    # ranking inside the search is estimated on this many distinct values
    score_sample: int = 200
    max_vertical_tokens: int = 5
    max_candidates: int = 8
    # skeleton-level classes are never finer than this tree depth
    base_cut: int = 2

    def __post_init__(self):
        if self.depth < 0:
            raise ConfigError("depth must be >= 0")
        if self.top_k < 1:
            raise ConfigError("top_k must be >= 1")
        for name in ("delimiter_support", "separator_support"):
            if not 0.0 < getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must be in (0, 1]")
        for name in ("indel_cost", "unalign_cost", "beta", "class_weight",
                     "enum_threshold", "enum_min_support"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.sample_size < 2 or self.vertical_sample < 2:
            raise ConfigError("sample sizes must be >= 2")

    @property
    def distance(self) -> DistanceParams:
        return DistanceParams(self.indel_cost, self.unalign_cost)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any], base: "LearnConfig | None" = None) -> "LearnConfig":
        known = {f.name: f.type for f in fields(cls)}
        unknown = set(data) - set(known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        try:
            return replace(base or cls(), **dict(data))
        except TypeError as e:
            raise ConfigError(str(e)) from None


def load_config(path: str | Path, base: LearnConfig | None = None) -> LearnConfig:
    """Read a JSON object of LearnConfig keys."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON at offset {e.pos}: {e.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return LearnConfig.from_mapping(data, base)
