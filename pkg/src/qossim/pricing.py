"""Revenue-optimal QoS price menus and the fixed per-node-minute baseline.

``optimize_menu`` maximizes the provider's expected revenue from a single
job,

    g(t, p) = sum_k pi_k * (p_f * q_f^k(t, p) + p_s * q_s^k(t, p)),

over the price box with a coarse-to-fine grid search. The objective is an
integral of indicator functions, so it is piecewise smooth with flat
regions and jumps; a grid is more reliable here than gradient steps.

``calibrate_fixed_price`` picks one rate per node-minute for all jobs, the
"Bench" mechanism, by the same expected-revenue criterion averaged over the
job mix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .catalog import JobCatalog, JobType
from .choice import (Estimator, PriceMenu, Quadrature, TierOption, make_menu,
                     tier_probabilities)
from .wtp import CustomerMix

ZOOM = 4.0


@dataclass(frozen=True)
class PricingConfig:
    price_upper_bound: float = 150.0
    coarse_grid_points: int = 64
    refinement_rounds: int = 6
    contention_premium_slope: float = 0.0
    quadrature_resolution: int = 512

    def __post_init__(self):
        if self.coarse_grid_points < 16:
            raise ValueError("coarse_grid_points must be at least 16")
        if self.refinement_rounds < 0:
            raise ValueError("refinement_rounds must be nonnegative")
        if self.contention_premium_slope < 0:
            raise ValueError("contention_premium_slope must be nonnegative")
        if self.price_upper_bound <= 0:
            raise ValueError("price_upper_bound must be positive")

    def check_mix(self, mix: CustomerMix):
        if self.price_upper_bound < mix.max_wtp_upper:
            raise ValueError(
                f"price_upper_bound {self.price_upper_bound} is below the largest "
                f"max-WTP bound {mix.max_wtp_upper}"
            )

    def estimator(self) -> Quadrature:
        return Quadrature(self.quadrature_resolution)


@dataclass(frozen=True)
class FixedPrice:
    rate: float  # currency per node-minute
    expected_revenue: Optional[float] = None

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError("fixed rate must be nonnegative")


@dataclass(frozen=True)
class OptimizedMenu:
    menu: PriceMenu
    expected_revenue: float  # g* at the optimized prices, before any premium


def revenue_surface(mix: CustomerMix, times: Sequence[float], prices,
                    method: Estimator) -> np.ndarray:
    """Expected revenue for each row of ``prices`` (shape ``(P, tiers)``)."""
    prices = np.atleast_2d(np.asarray(prices, dtype=float))
    total = np.zeros(len(prices))
    for ct in mix:
        q = tier_probabilities(ct, times, prices, method)
        total += ct.probability * np.sum(prices * q, axis=1)
    return total


def expected_revenue(mix: CustomerMix, menu: PriceMenu, method: Estimator) -> float:
    return float(revenue_surface(mix, menu.times, [menu.prices], method)[0])


def _better(value, point, best_value, best_point) -> bool:
    if value > best_value:
        return True
    return value == best_value and tuple(point) < tuple(best_point)


def coarse_to_fine_max(objective: Callable[[np.ndarray], np.ndarray], dims: int,
                       upper: float, points: int, rounds: int):
    """Maximize ``objective`` over ``[0, upper]**dims``.

    Each round evaluates a ``points``-per-axis grid, then shrinks the window
    by ``ZOOM`` around the best point so far. Grid ties go to the
    lexicographically smallest point. Returns ``(point, value)``.
    """
    lo = np.zeros(dims)
    hi = np.full(dims, float(upper))
    best_point, best_value = None, -np.inf
    for _ in range(rounds + 1):
        axes = [np.linspace(lo[d], hi[d], points) for d in range(dims)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dims)
        values = objective(grid)
        i = int(np.argmax(values))
        if best_point is None or _better(values[i], grid[i], best_value, best_point):
            best_point, best_value = grid[i].copy(), float(values[i])
        half = (hi - lo) / (2 * ZOOM)
        lo = np.clip(best_point - half, 0.0, upper - 2 * half)
        hi = lo + 2 * half
    return best_point, best_value


def optimize_menu(mix: CustomerMix, tiers: Sequence[TierOption], cfg: PricingConfig,
                  contention: Optional[float] = None,
                  method: Optional[Estimator] = None) -> OptimizedMenu:
    """Myopic revenue-maximizing menu for one job.

    With a positive ``contention_premium_slope`` and a ``contention`` value,
    the optimized prices are scaled by ``1 + slope * contention``.
    """
    tiers = tuple(tiers)
    if not tiers:
        raise ValueError("no tiers to price")
    if len(tiers) == 2 and not tiers[0].completion_time < tiers[1].completion_time:
        raise ValueError("tiers must be ordered fast to slow")
    cfg.check_mix(mix)
    method = method or cfg.estimator()
    times = [t.completion_time for t in tiers]

    def objective(grid):
        return revenue_surface(mix, times, grid, method)

    points = cfg.coarse_grid_points if len(tiers) == 2 else cfg.coarse_grid_points ** 2
    prices, g_star = coarse_to_fine_max(objective, len(tiers), cfg.price_upper_bound,
                                        points, cfg.refinement_rounds)
    if cfg.contention_premium_slope > 0 and contention is not None:
        if contention < 0:
            raise ValueError("contention must be nonnegative")
        prices = prices * (1.0 + cfg.contention_premium_slope * contention)
    return OptimizedMenu(make_menu(tiers, prices), g_star)


def bench_menu(job: JobType, rate: FixedPrice,
               tiers: Optional[Sequence[TierOption]] = None) -> PriceMenu:
    """Fixed-rate menu; ``tiers`` restricts it to the currently feasible tiers."""
    tiers = job.tier_options() if tiers is None else tuple(tiers)
    return make_menu(tiers, [rate.rate * t.node_count * t.completion_time for t in tiers])


def bench_revenue_curve(catalog: JobCatalog, mix: CustomerMix, rates,
                        method: Estimator) -> np.ndarray:
    rates = np.asarray(rates, dtype=float).reshape(-1)
    total = np.zeros(len(rates))
    for job in catalog:
        options = job.tier_options()
        node_minutes = np.array([t.node_count * t.completion_time for t in options])
        prices = rates[:, None] * node_minutes[None, :]
        total += job.mix_probability * revenue_surface(
            mix, [t.completion_time for t in options], prices, method)
    return total


def rate_upper_bound(catalog: JobCatalog, cfg: PricingConfig) -> float:
    """Rate above which every tier of every job costs more than ``price_upper_bound``."""
    smallest = min(min(t.node_count * t.completion_time for t in job.tier_options())
                   for job in catalog)
    return min(cfg.price_upper_bound, cfg.price_upper_bound / smallest)


def calibrate_fixed_price(catalog: JobCatalog, mix: CustomerMix, cfg: PricingConfig,
                          method: Optional[Estimator] = None) -> FixedPrice:
    """Single rate per node-minute maximizing expected revenue over the job mix."""
    if not len(catalog):
        raise ValueError("empty job mix")
    cfg.check_mix(mix)
    method = method or cfg.estimator()
    # one axis, so the same per-round budget as the 2-D menu search
    points = cfg.coarse_grid_points ** 2
    rate, value = coarse_to_fine_max(
        lambda grid: bench_revenue_curve(catalog, mix, grid[:, 0], method),
        1, rate_upper_bound(catalog, cfg), points, cfg.refinement_rounds,
    )
    return FixedPrice(float(rate[0]), value)
