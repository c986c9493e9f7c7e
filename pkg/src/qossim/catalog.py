"""Job types and the table-backed completion-time predictor."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .choice import FAST, SLOW, TierOption
from .wtp import MIX_TOLERANCE, categorical_index


@dataclass(frozen=True)
class TierShape:
    nodes: int
    minutes: float


@dataclass(frozen=True)
class JobType:
    name: str
    fast: TierShape
    slow: TierShape
    mix_probability: float = 1.0

    def __post_init__(self):
        if not self.fast.minutes < self.slow.minutes:
            raise ValueError(f"job {self.name}: fast tier must finish before the slow tier")
        if not self.fast.nodes > self.slow.nodes >= 1:
            raise ValueError(f"job {self.name}: fast tier must use more nodes than the slow tier")
        if not 0 < self.mix_probability <= 1:
            raise ValueError(f"job {self.name}: mix probability must be in (0, 1]")

    def tier_options(self) -> tuple[TierOption, TierOption]:
        return (
            TierOption(FAST, self.fast.minutes, self.fast.nodes),
            TierOption(SLOW, self.slow.minutes, self.slow.nodes),
        )


@dataclass(frozen=True)
class JobCatalog:
    types: tuple[JobType, ...]

    def __post_init__(self):
        object.__setattr__(self, "types", tuple(self.types))
        if not self.types:
            raise ValueError("job catalog is empty")
        names = [j.name for j in self.types]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate job type names: {names}")
        total = sum(j.mix_probability for j in self.types)
        if abs(total - 1.0) > MIX_TOLERANCE:
            raise ValueError(f"job mix probabilities sum to {total}, not 1")

    def __iter__(self):
        return iter(self.types)

    def __len__(self):
        return len(self.types)

    def get(self, name: str) -> JobType:
        for job in self.types:
            if job.name == name:
                return job
        raise KeyError(f"unknown job type {name!r}")


def predict(job: JobType, nodes: int) -> float:
    """Predicted completion minutes for a cluster of ``nodes`` nodes."""
    for shape in (job.fast, job.slow):
        if shape.nodes == nodes:
            return shape.minutes
    raise ValueError(f"no prediction for job {job.name} on {nodes} nodes")


def sample_job_type(catalog: JobCatalog, rng: np.random.Generator) -> JobType:
    return catalog.types[categorical_index([j.mix_probability for j in catalog.types], rng)]
