import inspect

import numpy as np
import pytest
from scipy.stats import poisson

from qossim.choice import FAST
from qossim.pricing import FixedPrice, PricingConfig
from qossim.simulator import (BenchStrategy, LinearSlowdown, RevOpStrategy, SimConfig,
                              SweepSetup, generate_trace, parse_slowdown, run_simulation,
                              run_sweep)
from qossim.wtp import WtpRealization

import scenarios

FAST_CFG = PricingConfig(coarse_grid_points=16, refinement_rounds=3, quadrature_resolution=64)


def test_trace_count_poisson_bounds(table1_mix, table2_catalog):
    cfg = SimConfig(capacity=50, mean_iat=30, horizon=3600)
    counts = np.array([len(generate_trace(cfg, table1_mix, table2_catalog, seed))
                       for seed in range(1000)])
    assert abs(counts.mean() - 120) < 2
    inside = np.mean((counts >= 90) & (counts <= 150))
    # exact Poisson(120) mass of [90, 150] is about 0.994
    assert poisson.cdf(150, 120) - poisson.cdf(89, 120) > 0.99
    assert inside >= 0.99


def test_trace_deterministic_and_well_formed(table1_mix, table2_catalog):
    cfg = SimConfig(capacity=50, mean_iat=20, horizon=3600)
    a = generate_trace(cfg, table1_mix, table2_catalog, 7)
    b = generate_trace(cfg, table1_mix, table2_catalog, 7)
    assert a == b
    times = [e.arrival_time for e in a]
    assert all(x < y for x, y in zip(times, times[1:]))
    assert all(0 <= e.tenant_id < 50 for e in a)
    assert times[-1] < 3600


def test_tenants_keep_their_type(table1_mix, table2_catalog):
    cfg = SimConfig(capacity=50, mean_iat=5, horizon=3600)
    trace = generate_trace(cfg, table1_mix, table2_catalog, 3)
    seen = {}
    for e in trace:
        assert seen.setdefault(e.tenant_id, e.customer_type_id) == e.customer_type_id
        ct = table1_mix.by_id(e.customer_type_id)
        assert ct.max_wtp_range[0] <= e.realization.max_wtp <= ct.max_wtp_range[1]


def test_hand_traced_scenario():
    result = run_simulation(scenarios.trace(), scenarios.config())
    assert [r["decision"] for r in result.log] == scenarios.EXPECTED_DECISIONS
    assert [len(r["menu"]) if r["menu"] else 0 for r in result.log] == [2, 2, 1, 0, 2]
    assert [c.price for c in result.contracts] == pytest.approx([23.0, 23.0, 15.3])
    assert [c.nodes for c in result.contracts] == [10, 10, 3]
    assert result.contracts[2].promised_completion == 2 + 51 * 60
    assert len(result.rejections) == 1 and len(result.declines) == 1


def test_single_job_revop_point_mass(point_mass_mix, io_job):
    from qossim.simulator import ArrivalEvent
    trace = [ArrivalEvent(0.0, 0, io_job, WtpRealization(100, 30), 1)]
    cfg = SimConfig(capacity=10, mean_iat=30, strategy=RevOpStrategy(point_mass_mix, PricingConfig()))
    result = run_simulation(trace, cfg)
    (c,) = result.contracts
    assert c.tier == FAST
    assert c.price == pytest.approx(700 / 29, abs=150 / 1999)


def test_zero_capacity_rejects_everything(table1_mix, table2_catalog):
    cfg = SimConfig(capacity=0, mean_iat=30, strategy=BenchStrategy(FixedPrice(1.0)))
    trace = generate_trace(cfg, table1_mix, table2_catalog, 1)
    result = run_simulation(trace, cfg)
    assert not result.contracts and len(result.rejections) == len(trace)
    assert sum(c.price for c in result.contracts) == 0


class SpyStrategy:
    name = "spy"

    def __init__(self, inner):
        self.inner = inner
        self.calls = []

    def menu(self, *args):
        self.calls.append(args)
        return self.inner.menu(*args)


def test_strategies_never_see_realizations(table1_mix, table2_catalog):
    for cls in (RevOpStrategy, BenchStrategy):
        params = inspect.signature(cls.menu).parameters
        assert list(params) == ["self", "job", "tiers", "contention"]
    spy = SpyStrategy(BenchStrategy(FixedPrice(0.5)))
    cfg = SimConfig(capacity=60, mean_iat=10, strategy=spy)
    run_simulation(generate_trace(cfg, table1_mix, table2_catalog, 2), cfg)
    assert spy.calls
    for args in spy.calls:
        flat = list(args[:1]) + list(args[1]) + list(args[2:])
        assert not any(isinstance(a, WtpRealization) for a in flat)


def test_ledger_never_overcommitted(table1_mix, table2_catalog):
    from qossim.metrics import peak_load
    strategy = RevOpStrategy(table1_mix, FAST_CFG)
    for seed in range(5):
        cfg = SimConfig(capacity=50, mean_iat=10, strategy=strategy)
        result = run_simulation(generate_trace(cfg, table1_mix, table2_catalog, seed), cfg)
        assert peak_load(result.contracts) <= 50
        assert all(c.succeeded for c in result.contracts)


def test_run_is_deterministic(table1_mix, table2_catalog):
    cfg = SimConfig(capacity=50, mean_iat=20, strategy=RevOpStrategy(table1_mix, FAST_CFG))
    trace = generate_trace(cfg, table1_mix, table2_catalog, 4)
    assert run_simulation(trace, cfg).contracts == run_simulation(trace, cfg).contracts


def test_slowdown_hook_breaks_contracts(table1_mix, table2_catalog):
    cfg = SimConfig(capacity=50, mean_iat=10, strategy=BenchStrategy(FixedPrice(0.2)),
                    slowdown=LinearSlowdown(1.0, 0.2))
    result = run_simulation(generate_trace(cfg, table1_mix, table2_catalog, 0), cfg)
    late = [c for c in result.contracts if not c.succeeded]
    assert late and all(c.actual_completion > c.promised_completion for c in late)


def test_parse_slowdown():
    assert parse_slowdown("none") is None
    s = parse_slowdown("linear:2:0.25")
    assert s(0.75) == pytest.approx(2.0)
    assert parse_slowdown("linear:1")(0.5) == 1.0
    for bad in ("quadratic:1", "linear", "linear:1:2:3"):
        with pytest.raises(ValueError):
            parse_slowdown(bad)


def test_unsorted_trace_rejected():
    trace = scenarios.trace()
    with pytest.raises(ValueError):
        run_simulation(trace[::-1], scenarios.config())


@pytest.fixture(scope="module")
def quick_setup():
    from conftest import TABLE1
    from qossim import CustomerMix, CustomerType, JobCatalog, JobType, TierShape
    mix = CustomerMix(tuple(CustomerType(i, 0.5, m, d) for i, m, d in TABLE1))
    catalog = JobCatalog((JobType("IO", TierShape(10, 23), TierShape(3, 51), 0.5),
                          JobType("CPU", TierShape(10, 5), TierShape(3, 9), 0.5)))
    return SweepSetup(mix, catalog, FAST_CFG, horizon=900)


def test_sweep_cardinality_single(quick_setup):
    records = run_sweep([50], [30], [0], quick_setup)
    assert [r.strategy for r in records] == ["bench", "revop"]


def test_sweep_pairs_share_trace(quick_setup):
    bench, revop = run_sweep([50], [30], [0], quick_setup)
    strip = lambda log: [(r["t"], r["tenant"], r["job_type"]) for r in log]
    assert strip(bench.result.log) == strip(revop.result.log)


def test_sweep_full_cardinality_and_order(quick_setup):
    records = run_sweep([50, 75, 100, 125, 150], [20, 25, 30, 35, 40, 45], [0, 1, 2], quick_setup)
    assert len(records) == 180
    pairs = {(r.capacity, r.mean_iat, r.seed) for r in records}
    assert len(pairs) == 90
    keys = [(r.capacity, r.mean_iat, r.seed, r.strategy) for r in records]
    assert keys == sorted(keys)


def test_sweep_parallel_matches_serial(quick_setup):
    from dataclasses import replace
    serial = run_sweep([50, 100], [20, 40], [0, 1], quick_setup)
    threaded = run_sweep([50, 100], [20, 40], [0, 1], replace(quick_setup, parallel=4))
    assert [r.result.contracts for r in serial] == [r.result.contracts for r in threaded]
