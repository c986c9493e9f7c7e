"""Poisson job traces and the quote / choose / admit event loop.

Each arrival is handled in order:

1. release allocations that are due,
2. keep the tiers whose node count fits in the free capacity,
3. reject (no quote) if none fits,
4. ask the pricing strategy for a menu over the feasible tiers,
5. let the buyer choose with its private realization,
6. admit the chosen tier and record a contract.

Pricing strategies only ever see the customer mix and tier structure.
"""

from __future__ import annotations

import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .catalog import JobCatalog, JobType, sample_job_type
from .choice import Estimator, MenuTier, PriceMenu, TierOption, choose
from .ledger import ClusterLedger
from .pricing import (FixedPrice, PricingConfig, bench_menu, calibrate_fixed_price,
                      optimize_menu)
from .wtp import (CustomerMix, WtpRealization, sample_customer_type, sample_realization,
                  wtp_value)

TENANTS = 50


@dataclass(frozen=True)
class ArrivalEvent:
    arrival_time: float  # seconds
    tenant_id: int
    job_type: JobType
    realization: WtpRealization
    customer_type_id: int


@dataclass(frozen=True)
class Contract:
    contract_id: int
    tenant_id: int
    tier: str
    price: float
    nodes: int
    start: float
    promised_completion: float
    actual_completion: float
    job_type: str = ""
    delivered_wtp: Optional[float] = None

    @property
    def succeeded(self) -> bool:
        return self.actual_completion <= self.promised_completion

    @property
    def duration(self) -> float:
        return self.actual_completion - self.start


class LinearSlowdown:
    """Uncalibrated interference model.

    The run time is stretched by ``1 + slope * max(0, load - threshold)``,
    where ``load`` is the allocated fraction of the cluster once the job
    starts.
    """

    def __init__(self, slope: float, threshold: float = 0.5):
        if slope < 0:
            raise ValueError("slowdown slope must be nonnegative")
        self.slope = slope
        self.threshold = threshold

    def __call__(self, load: float) -> float:
        return 1.0 + self.slope * max(0.0, load - self.threshold)

    def __repr__(self):
        return f"linear:{self.slope}:{self.threshold}"


def parse_slowdown(spec: Optional[str]) -> Optional[LinearSlowdown]:
    """Parse ``none`` or ``linear:SLOPE[:THRESHOLD]``."""
    if spec is None or spec == "none":
        return None
    kind, _, rest = spec.partition(":")
    if kind != "linear" or not rest:
        raise ValueError(f"unknown slowdown model {spec!r}")
    parts = [float(x) for x in rest.split(":")]
    if len(parts) > 2:
        raise ValueError(f"unknown slowdown model {spec!r}")
    return LinearSlowdown(*parts)


class RevOpStrategy:
    """Per-job expected-revenue maximization, cached by feasible tier set."""

    name = "revop"

    def __init__(self, mix: CustomerMix, cfg: PricingConfig,
                 method: Optional[Estimator] = None):
        self.mix = mix
        self.cfg = cfg
        self.method = method
        self._cache: dict = {}
        self._lock = threading.Lock()

    def menu(self, job: JobType, tiers: Sequence[TierOption],
             contention: Optional[float] = None) -> PriceMenu:
        key = tuple(tiers)
        with self._lock:
            base = self._cache.get(key)
        if base is None:
            base = optimize_menu(self.mix, key, self.cfg, method=self.method).menu
            with self._lock:
                self._cache.setdefault(key, base)
        slope = self.cfg.contention_premium_slope
        if slope > 0 and contention is not None:
            factor = 1.0 + slope * contention
            return PriceMenu(tuple(
                MenuTier(t.tier_id, t.completion_time, t.price * factor, t.node_count)
                for t in base.tiers
            ))
        return base


class BenchStrategy:
    name = "bench"

    def __init__(self, rate: FixedPrice):
        self.rate = rate

    def menu(self, job: JobType, tiers: Sequence[TierOption],
             contention: Optional[float] = None) -> PriceMenu:
        return bench_menu(job, self.rate, tiers)


@dataclass
class SimConfig:
    capacity: int
    mean_iat: float  # seconds
    horizon: float = 3600.0  # seconds
    seed: int = 0
    strategy: object = None
    slowdown: Optional[Callable[[float], float]] = None
    tenants: int = TENANTS

    def __post_init__(self):
        if not self.mean_iat > 0:
            raise ValueError("mean_iat must be positive")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if self.capacity < 0:
            raise ValueError("capacity must be nonnegative")

    @property
    def contention(self) -> float:
        if self.capacity == 0:
            return float("inf")
        return 1.0 / (self.mean_iat * self.capacity)


@dataclass
class SimResult:
    contracts: list
    rejections: list
    declines: list
    log: list
    capacity: int
    horizon: float
    strategy: str = ""

    @property
    def arrivals(self) -> int:
        return len(self.contracts) + len(self.rejections) + len(self.declines)

    def write_log(self, path):
        with open(path, "w") as fh:
            for record in self.log:
                fh.write(json.dumps(record, sort_keys=True) + "\n")


def generate_trace(cfg: SimConfig, mix: CustomerMix, catalog: JobCatalog,
                   seed: Optional[int] = None) -> list:
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    tenant_types = [sample_customer_type(mix, rng) for _ in range(cfg.tenants)]
    trace = []
    t = 0.0
    while True:
        t += rng.exponential(cfg.mean_iat)
        if t >= cfg.horizon:
            break
        tenant = int(rng.integers(cfg.tenants))
        job = sample_job_type(catalog, rng)
        ct = tenant_types[tenant]
        trace.append(ArrivalEvent(t, tenant, job, sample_realization(ct, rng), ct.id))
    return trace


def run_simulation(trace: Sequence[ArrivalEvent], cfg: SimConfig) -> SimResult:
    strategy = cfg.strategy
    if strategy is None:
        raise ValueError("SimConfig.strategy is not set")
    ledger = ClusterLedger(cfg.capacity)
    contention = cfg.contention if cfg.capacity else None
    contracts, rejections, declines, log = [], [], [], []
    last_time = -np.inf
    for idx, ev in enumerate(trace):
        if ev.arrival_time <= last_time:
            raise ValueError("trace arrival times must be strictly increasing")
        last_time = now = ev.arrival_time
        ledger.release_due(now)
        free = ledger.available(now)
        feasible = [t for t in ev.job_type.tier_options() if t.node_count <= free]
        record = {"t": now, "tenant": ev.tenant_id, "job_type": ev.job_type.name,
                  "available": free}
        if not feasible:
            rejections.append(ev)
            record.update(decision="rejected", menu=None, price=None)
            log.append(record)
            continue
        menu = strategy.menu(ev.job_type, feasible, contention)
        record["menu"] = menu.to_list()
        choice = choose(ev.realization, menu)
        if choice.selected is None:
            declines.append(ev)
            record.update(decision="declined", price=None)
            log.append(record)
            continue
        tier = menu.tier(choice.selected)
        promised = tier.completion_time * 60.0
        actual = promised
        if cfg.slowdown is not None:
            load = (cfg.capacity - free + tier.node_count) / cfg.capacity
            actual = promised * cfg.slowdown(load)
        if not ledger.try_admit(tier.node_count, now, actual, idx):
            raise RuntimeError(f"admission failed after feasibility check at t={now}")
        contracts.append(Contract(
            contract_id=idx, tenant_id=ev.tenant_id, tier=tier.tier_id, price=tier.price,
            nodes=tier.node_count, start=now, promised_completion=now + promised,
            actual_completion=now + actual, job_type=ev.job_type.name,
            delivered_wtp=wtp_value(ev.realization, actual / 60.0),
        ))
        record.update(decision=tier.tier_id, price=tier.price, contract_id=idx)
        log.append(record)
    return SimResult(contracts, rejections, declines, log, cfg.capacity, cfg.horizon,
                     getattr(strategy, "name", ""))


def trace_seed(seed: int, mean_iat: float) -> int:
    """Trace seed shared by every capacity level at one (seed, IAT) point."""
    ss = np.random.SeedSequence([int(seed), int(round(mean_iat * 1000))])
    return int(ss.generate_state(1)[0])


@dataclass
class SweepSetup:
    mix: CustomerMix
    catalog: JobCatalog
    pricing: PricingConfig = field(default_factory=PricingConfig)
    horizon: float = 3600.0
    slowdown: Optional[Callable[[float], float]] = None
    tenants: int = TENANTS
    parallel: int = 1
    bench_rate: Optional[FixedPrice] = None


@dataclass(frozen=True)
class RunRecord:
    capacity: int
    mean_iat: float
    seed: int
    strategy: str
    result: SimResult

    @property
    def contention(self) -> float:
        return 1.0 / (self.mean_iat * self.capacity) if self.capacity else float("inf")


def run_sweep(capacities: Sequence[int], mean_iats: Sequence[float], seeds: Sequence[int],
              setup: SweepSetup) -> list:
    """Paired RevOp/Bench runs over every (capacity, IAT, seed) point.

    Both strategies replay the same trace. Returned records are sorted by
    (capacity, IAT, seed, strategy) whatever the worker count.
    """
    if not capacities or not mean_iats or not seeds:
        raise ValueError("sweep axes must be nonempty")
    rate = setup.bench_rate or calibrate_fixed_price(setup.catalog, setup.mix, setup.pricing)
    strategies = [RevOpStrategy(setup.mix, setup.pricing), BenchStrategy(rate)]

    def one_point(point):
        capacity, iat, seed = point
        base = SimConfig(capacity, iat, setup.horizon, seed, slowdown=setup.slowdown,
                         tenants=setup.tenants)
        trace = generate_trace(base, setup.mix, setup.catalog, trace_seed(seed, iat))
        records = []
        for strategy in strategies:
            base.strategy = strategy
            records.append(RunRecord(capacity, iat, seed, strategy.name,
                                     run_simulation(trace, base)))
        return records

    points = [(c, i, s) for c in capacities for i in mean_iats for s in seeds]
    if setup.parallel > 1:
        with ThreadPoolExecutor(setup.parallel) as pool:
            chunks = list(pool.map(one_point, points))
    else:
        chunks = [one_point(p) for p in points]
    records = [r for chunk in chunks for r in chunk]
    records.sort(key=lambda r: (r.capacity, r.mean_iat, r.seed, r.strategy))
    return records
