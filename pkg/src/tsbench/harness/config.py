"""Benchmark run configuration."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..clustering.density import ASSIGNMENT_MODES
from ..clustering.methods import METHODS
from ..core import MergePolicy


@dataclass(frozen=True)
class BenchmarkConfig:
    archive_dir: Path
    output_dir: Path
    methods: tuple = tuple(METHODS)
    datasets: tuple | None = None
    runs: int = 10
    base_seed: int = 0
    window_fraction: float = 0.05
    neighbor_fraction: float = 0.02
    merge_policy: str = "merged"
    assignment_mode: str = "closest_centroid"
    threads: int = 1
    # directory for cached distance matrices; defaults to <output_dir>/cache
    cache_dir: Path | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "archive_dir", Path(self.archive_dir))
        object.__setattr__(self, "output_dir", Path(self.output_dir))
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.datasets is not None:
            object.__setattr__(self, "datasets", tuple(self.datasets))
        if not self.methods:
            raise ValueError("at least one method is required")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; choose from {sorted(METHODS)}")
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        MergePolicy(self.merge_policy)
        if self.assignment_mode not in ASSIGNMENT_MODES:
            raise ValueError(f"unknown assignment mode {self.assignment_mode!r}")

    @property
    def cache_path(self) -> Path:
        return Path(self.cache_dir) if self.cache_dir is not None else self.output_dir / "cache"

    def scientific_dict(self) -> dict:
        """Settings that determine the scores; paths and thread count are excluded."""
        d = asdict(self)
        for key in ("archive_dir", "output_dir", "threads", "cache_dir"):
            d.pop(key)
        d["methods"] = list(self.methods)
        d["datasets"] = None if self.datasets is None else list(self.datasets)
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.scientific_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]
