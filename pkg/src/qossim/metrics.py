"""Per-run metrics, paired RevOp/Bench gains, CSV output and summary tables."""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import asdict, dataclass, fields
from typing import Optional, Sequence

import numpy as np

METRICS = ("revenue", "net_utility", "utilization", "node_periods",
           "admission_rate", "success_rate", "max_load")

CSV_COLUMNS = ("capacity", "mean_iat_s", "seed", "strategy", "contention") + METRICS

SUMMARY_LABELS = {
    "revenue": "Revenue",
    "net_utility": "Utility",
    "utilization": "Utilization",
    "node_periods": "Node Periods",
    "success_rate": "Success Rate",
    "max_load": "Max Load",
    "admission_rate": "Admission Rate",
}

Z95 = 1.959963984540054


@dataclass(frozen=True)
class RunMetrics:
    revenue: float
    net_utility: float
    utilization: float
    node_periods: float  # node-minutes
    admission_rate: float
    success_rate: float
    max_load: int

    def as_dict(self) -> dict:
        return asdict(self)


def busy_node_seconds(contracts) -> float:
    return float(sum(c.nodes * (c.actual_completion - c.start) for c in contracts))


def effective_horizon(contracts, horizon: float) -> float:
    return max([horizon] + [c.actual_completion for c in contracts])


def peak_load(contracts) -> int:
    events = []
    for c in contracts:
        events.append((c.start, 1, c.nodes))
        events.append((c.actual_completion, 0, -c.nodes))  # releases sort before starts
    load = peak = 0
    for _, _, delta in sorted(events):
        load += delta
        peak = max(peak, load)
    return peak


def compute_metrics(contracts: Sequence, rejections: Sequence, declines: Sequence,
                    capacity: int, horizon: float) -> RunMetrics:
    arrivals = len(contracts) + len(rejections) + len(declines)
    quoted = len(contracts) + len(declines)
    busy = busy_node_seconds(contracts)
    span = effective_horizon(contracts, horizon)
    return RunMetrics(
        revenue=float(sum(c.price for c in contracts)),
        net_utility=float(sum(c.delivered_wtp - c.price for c in contracts)),
        utilization=busy / (capacity * span) if capacity else 0.0,
        node_periods=busy / 60.0,
        admission_rate=quoted / arrivals if arrivals else 0.0,
        success_rate=(sum(c.succeeded for c in contracts) / len(contracts)) if contracts else 0.0,
        max_load=peak_load(contracts),
    )


def result_metrics(result) -> RunMetrics:
    return compute_metrics(result.contracts, result.rejections, result.declines,
                           result.capacity, result.horizon)


@dataclass(frozen=True)
class MetricRow:
    """One CSV line: a single (capacity, IAT, seed, strategy) run."""

    capacity: int
    mean_iat_s: float
    seed: int
    strategy: str
    contention: float
    metrics: RunMetrics

    def as_dict(self) -> dict:
        d = {"capacity": self.capacity, "mean_iat_s": self.mean_iat_s, "seed": self.seed,
             "strategy": self.strategy, "contention": self.contention}
        d.update(self.metrics.as_dict())
        return d


def rows_from_records(records) -> list:
    return [MetricRow(r.capacity, float(r.mean_iat), r.seed, r.strategy, r.contention,
                      result_metrics(r.result)) for r in records]


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_csv(rows: Sequence[MetricRow], path) -> None:
    if not rows:
        raise ValueError("no rows to write")
    ordered = sorted(rows, key=lambda r: (r.capacity, r.mean_iat_s, r.seed, r.strategy))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in ordered:
            d = row.as_dict()
            writer.writerow([_fmt(d[c]) for c in CSV_COLUMNS])


def read_csv(path) -> list:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            metrics = RunMetrics(**{f.name: (int(rec[f.name]) if f.name == "max_load"
                                             else float(rec[f.name]))
                                    for f in fields(RunMetrics)})
            rows.append(MetricRow(int(rec["capacity"]), float(rec["mean_iat_s"]),
                                  int(rec["seed"]), rec["strategy"],
                                  float(rec["contention"]), metrics))
    return rows


@dataclass(frozen=True)
class SweepRow:
    """Seed-averaged paired metrics for one (capacity, IAT) cell."""

    capacity: int
    mean_iat: float
    contention: float
    revop: dict
    bench: dict
    gains: dict  # metric -> relative gain, None where the bench value is 0


def relative_gain(revop: float, bench: float) -> Optional[float]:
    if bench == 0:
        return None
    return (revop - bench) / bench


def sweep_rows(rows: Sequence[MetricRow]) -> list:
    cells = defaultdict(lambda: defaultdict(list))
    for row in rows:
        cells[(row.capacity, row.mean_iat_s)][row.strategy].append(row.metrics)
    out = []
    for (capacity, iat), by_strategy in sorted(cells.items()):
        if "revop" not in by_strategy or "bench" not in by_strategy:
            raise ValueError(f"cell capacity={capacity} iat={iat} is missing a paired run")
        means = {s: {m: float(np.mean([getattr(x, m) for x in runs])) for m in METRICS}
                 for s, runs in by_strategy.items()}
        gains = {m: relative_gain(means["revop"][m], means["bench"][m]) for m in METRICS}
        out.append(SweepRow(capacity, iat, 1.0 / (iat * capacity), means["revop"],
                            means["bench"], gains))
    return out


def mean_and_se(values: Sequence[float]) -> tuple[float, float]:
    values = np.asarray(values, dtype=float)
    if len(values) < 2:
        return float(values.mean()), 0.0
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(len(values)))


def paired_gains(rows: Sequence[SweepRow]) -> dict:
    """Gain per capacity: ``{capacity: {metric: (mean, se) or None}}`` across IAT cells."""
    by_capacity = defaultdict(list)
    for row in rows:
        by_capacity[row.capacity].append(row)
    out = {}
    for capacity, cells in sorted(by_capacity.items()):
        out[capacity] = {}
        for m in METRICS:
            gains = [c.gains[m] for c in cells if c.gains[m] is not None]
            out[capacity][m] = mean_and_se(gains) if gains else None
    return out


def pooled_summary(rows: Sequence[MetricRow]) -> dict:
    """All runs pooled: ``{strategy: {metric: (mean, 95% half-width)}}``."""
    by_strategy = defaultdict(list)
    for row in rows:
        by_strategy[row.strategy].append(row.metrics)
    out = {}
    for strategy, runs in by_strategy.items():
        out[strategy] = {}
        for m in METRICS:
            mean, se = mean_and_se([getattr(r, m) for r in runs])
            out[strategy][m] = (mean, Z95 * se)
    return out


def _pm(mean: float, half: float) -> str:
    if abs(mean) >= 10:
        return f"{mean:.0f} +/- {half:.0f}"
    return f"{mean:.2f} +/- {half:.2f}"


def format_summary(rows: Sequence[MetricRow]) -> str:
    summary = pooled_summary(rows)
    strategies = [s for s in ("bench", "revop") if s in summary]
    n = len(rows) // max(1, len(strategies))
    lines = [f"Pooled over all cells and seeds ({n} runs per strategy), mean +/- 95% bound",
             f"{'':16}" + "".join(f"{s:>22}" for s in strategies)]
    for m, label in SUMMARY_LABELS.items():
        lines.append(f"{label:16}" + "".join(f"{_pm(*summary[s][m]):>22}" for s in strategies))
    return "\n".join(lines)


def format_gains(rows: Sequence[SweepRow]) -> str:
    gains = paired_gains(rows)
    shown = ("revenue", "net_utility", "admission_rate", "utilization", "success_rate")
    lines = ["Relative gain of revop over bench by capacity, mean +/- SE across IAT settings",
             f"{'capacity':>8}" + "".join(f"{m:>22}" for m in shown)]
    for capacity, per_metric in gains.items():
        cells = []
        for m in shown:
            g = per_metric[m]
            cells.append(f"{'n/a':>22}" if g is None else f"{g[0]:>+13.3f} +/- {g[1]:.3f}")
        lines.append(f"{capacity:>8}" + "".join(cells))
    return "\n".join(lines)
