"""Experiment configuration files (JSON, versioned by a ``schema`` key)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Optional

from .catalog import JobCatalog, JobType, TierShape
from .pricing import PricingConfig
from .simulator import TENANTS, SweepSetup, parse_slowdown
from .wtp import CustomerMix, CustomerType

SCHEMA = "qossim.experiment/1"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    mix: CustomerMix
    catalog: JobCatalog
    capacities: tuple[int, ...]
    mean_iats: tuple[float, ...]
    seeds: tuple[int, ...]
    horizon: float = 3600.0
    tenants: int = TENANTS
    pricing: PricingConfig = field(default_factory=PricingConfig)
    slowdown: str = "none"
    output: str = "sweep.csv"

    def sweep_setup(self, parallel: int = 1) -> SweepSetup:
        return SweepSetup(self.mix, self.catalog, self.pricing, self.horizon,
                          parse_slowdown(self.slowdown), self.tenants, parallel)

    def with_overrides(self, **changes) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def _customer_type(d: dict) -> CustomerType:
    return CustomerType(int(d["id"]), float(d["probability"]),
                        tuple(d["max_wtp_range"]), tuple(d["deadline_range"]))


def _job_type(d: dict) -> JobType:
    return JobType(d["name"], TierShape(int(d["fast"]["nodes"]), float(d["fast"]["minutes"])),
                   TierShape(int(d["slow"]["nodes"]), float(d["slow"]["minutes"])),
                   float(d.get("mix_probability", 1.0)))


def from_dict(d: dict) -> ExperimentConfig:
    if d.get("schema") != SCHEMA:
        raise ConfigError(f"unsupported config schema {d.get('schema')!r}, expected {SCHEMA!r}")
    try:
        cfg = ExperimentConfig(
            mix=CustomerMix(tuple(_customer_type(c) for c in d["customer_types"])),
            catalog=JobCatalog(tuple(_job_type(j) for j in d["job_types"])),
            capacities=tuple(int(c) for c in d["capacities"]),
            mean_iats=tuple(float(x) for x in d["mean_iats_s"]),
            seeds=tuple(int(s) for s in d["seeds"]),
            horizon=float(d.get("horizon_s", 3600.0)),
            tenants=int(d.get("tenants", TENANTS)),
            pricing=PricingConfig(**d.get("pricing", {})),
            slowdown=d.get("slowdown", "none"),
            output=d.get("output", "sweep.csv"),
        )
        cfg.pricing.check_mix(cfg.mix)
        parse_slowdown(cfg.slowdown)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid config: {exc}") from exc
    if cfg.horizon <= 0 or cfg.tenants < 1:
        raise ConfigError("horizon_s must be positive and tenants at least 1")
    if any(c < 0 for c in cfg.capacities) or any(i <= 0 for i in cfg.mean_iats):
        raise ConfigError("capacities must be >= 0 and mean IATs > 0")
    return cfg


def load_config(path: Optional[str] = None) -> ExperimentConfig:
    """Load ``path``, or the bundled default setup when ``path`` is None."""
    try:
        if path is None:
            text = resources.files("qossim").joinpath("data/default_config.json").read_text()
        else:
            with open(path) as fh:
                text = fh.read()
        data = json.loads(text)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return from_dict(data)
