import math

import pytest

from qossim.metrics import (CSV_COLUMNS, METRICS, MetricRow, RunMetrics, busy_node_seconds,
                            compute_metrics, effective_horizon, emit_csv, format_gains,
                            format_summary, paired_gains, read_csv, relative_gain,
                            result_metrics, sweep_rows)
from qossim.simulator import Contract, run_simulation

import scenarios


def contract(**kw):
    base = dict(contract_id=1, tenant_id=0, tier="fast", price=30.0, nodes=5, start=0.0,
                promised_completion=1200.0, actual_completion=1200.0, delivered_wtp=50.0)
    base.update(kw)
    return Contract(**base)


def test_single_contract_metrics():
    m = compute_metrics([contract()], [], [], capacity=10, horizon=6000)
    assert m.node_periods == 100
    assert m.utilization == pytest.approx(0.1)
    assert m.revenue == 30 and m.net_utility == 20 and m.max_load == 5
    assert m.admission_rate == 1.0 and m.success_rate == 1.0


def test_no_contracts():
    m = compute_metrics([], ["r1", "r2"], [], capacity=10, horizon=100)
    assert m == RunMetrics(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0)
    m = compute_metrics([], [], ["d"], capacity=10, horizon=100)
    assert m.admission_rate == 1.0 and m.revenue == 0


def test_hand_traced_metrics():
    result = run_simulation(scenarios.trace(), scenarios.config())
    m = result_metrics(result)
    assert m.revenue == pytest.approx(scenarios.EXPECTED_REVENUE)
    assert m.node_periods == pytest.approx(scenarios.EXPECTED_NODE_MINUTES)
    assert m.utilization == pytest.approx(scenarios.EXPECTED_UTILIZATION)
    assert m.net_utility == pytest.approx(scenarios.EXPECTED_UTILITY)
    assert m.admission_rate == pytest.approx(scenarios.EXPECTED_ADMISSION)
    assert m.max_load == scenarios.EXPECTED_MAX_LOAD
    assert m.success_rate == 1.0


def test_utilization_identity_with_trailing_job():
    cs = [contract(start=3500.0, actual_completion=4700.0, promised_completion=4700.0)]
    m = compute_metrics(cs, [], [], capacity=10, horizon=3600)
    span = effective_horizon(cs, 3600)
    assert span == 4700
    assert m.utilization * 10 * span == pytest.approx(busy_node_seconds(cs), rel=1e-15)


def test_peak_load_release_before_start():
    cs = [contract(nodes=6, start=0, actual_completion=10, promised_completion=10),
          contract(contract_id=2, nodes=6, start=10, actual_completion=20, promised_completion=20)]
    assert compute_metrics(cs, [], [], 10, 20).max_load == 6


def row(strategy, capacity=50, iat=20.0, seed=0, **values):
    base = dict(revenue=100.0, net_utility=10.0, utilization=0.5, node_periods=10.0,
                admission_rate=0.5, success_rate=1.0, max_load=5)
    base.update(values)
    return MetricRow(capacity, iat, seed, strategy, 1 / (iat * capacity), RunMetrics(**base))


def test_gain_examples():
    rows = sweep_rows([row("revop"), row("bench")])
    assert paired_gains(rows)[50]["revenue"] == (0.0, 0.0)
    assert relative_gain(140, 100) == pytest.approx(0.4)
    rows = sweep_rows([row("revop", revenue=120.0), row("bench"),
                       row("revop", iat=40.0, revenue=140.0), row("bench", iat=40.0)])
    mean, se = paired_gains(rows)[50]["revenue"]
    assert mean == pytest.approx(0.3) and se == pytest.approx(0.1)


def test_gain_undefined_when_bench_zero():
    rows = sweep_rows([row("revop", revenue=5.0), row("bench", revenue=0.0)])
    assert rows[0].gains["revenue"] is None
    assert paired_gains(rows)[50]["revenue"] is None


def test_sweep_row_contention():
    (r,) = sweep_rows([row("revop", capacity=75, iat=40.0), row("bench", capacity=75, iat=40.0)])
    assert r.contention == 1 / (40 * 75)


def test_missing_pair_rejected():
    with pytest.raises(ValueError):
        sweep_rows([row("revop")])


def test_csv_single_row(tmp_path):
    path = tmp_path / "one.csv"
    emit_csv([row("revop")], path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 2


def test_csv_deterministic_and_round_trip(tmp_path):
    rows = [row("revop", revenue=1 / 3, utilization=math.pi / 10), row("bench", seed=2),
            row("revop", capacity=150, net_utility=-2.5e-17)]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    emit_csv(rows, a)
    emit_csv(list(reversed(rows)), b)
    assert a.read_bytes() == b.read_bytes()
    back = read_csv(a)
    assert sorted(back, key=repr) == sorted(rows, key=repr)


def test_csv_errors(tmp_path):
    with pytest.raises(ValueError):
        emit_csv([], tmp_path / "x.csv")
    with pytest.raises(OSError):
        emit_csv([row("revop")], tmp_path / "missing" / "x.csv")


def test_summary_text():
    rows = [row("revop", revenue=120.0), row("bench"), row("revop", seed=1), row("bench", seed=1)]
    text = format_summary(rows)
    for label in ("Revenue", "Utility", "Utilization", "Node Periods", "Success Rate",
                  "Max Load", "Admission Rate"):
        assert label in text
    assert "capacity" in format_gains(sweep_rows(rows))
    assert set(METRICS) <= set(CSV_COLUMNS)
