"""Buyer tier selection and the provider-side purchase probabilities.

The buyer takes the tier with the largest nonnegative surplus ``W(t) - p``;
exact ties go to the faster tier. The provider does not see the buyer's
``(M, D)`` draw, so it works with the probability of each choice under the
customer type's product-uniform distribution.

Two estimators are provided:

* ``MonteCarlo(n, seed)`` samples ``(M, D)`` and applies the choice rule.
* ``Quadrature(resolution)`` uses the fact that for a fixed deadline every
  choice region is an interval in ``M`` (``W`` is linear in ``M``).  The
  ``M`` integral is taken exactly and the deadline axis with a midpoint rule
  on ``resolution`` nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .wtp import CustomerType, WtpRealization, wtp_curve

FAST = "fast"
SLOW = "slow"
TIER_IDS = (FAST, SLOW)

NONE_CODE = -1


@dataclass(frozen=True)
class TierOption:
    """A completion-time tier before it has a price."""

    tier_id: str
    completion_time: float  # minutes
    node_count: int


@dataclass(frozen=True)
class MenuTier:
    tier_id: str
    completion_time: float  # minutes
    price: float
    node_count: int

    def to_dict(self) -> dict:
        return {
            "tier": self.tier_id,
            "completion_minutes": self.completion_time,
            "price": self.price,
            "nodes": self.node_count,
        }


@dataclass(frozen=True)
class PriceMenu:
    tiers: tuple[MenuTier, ...]

    def __post_init__(self):
        tiers = tuple(self.tiers)
        object.__setattr__(self, "tiers", tiers)
        if not 1 <= len(tiers) <= 2:
            raise ValueError("a menu has one or two tiers")
        for tier in tiers:
            if tier.tier_id not in TIER_IDS:
                raise ValueError(f"unknown tier id {tier.tier_id!r}")
            if not np.isfinite(tier.price) or tier.price < 0:
                raise ValueError(f"tier {tier.tier_id}: price must be finite and >= 0")
            if tier.node_count < 1:
                raise ValueError(f"tier {tier.tier_id}: node_count must be >= 1")
        if len(tiers) == 2:
            if tiers[0].tier_id == tiers[1].tier_id:
                raise ValueError("tier ids must be distinct")
            if not tiers[0].completion_time < tiers[1].completion_time:
                raise ValueError("completion times must be strictly increasing")

    def tier(self, tier_id: str) -> Optional[MenuTier]:
        for tier in self.tiers:
            if tier.tier_id == tier_id:
                return tier
        return None

    @property
    def times(self) -> tuple[float, ...]:
        return tuple(t.completion_time for t in self.tiers)

    @property
    def prices(self) -> tuple[float, ...]:
        return tuple(t.price for t in self.tiers)

    def to_list(self) -> list[dict]:
        return [t.to_dict() for t in self.tiers]


def make_menu(options: Sequence[TierOption], prices: Sequence[float]) -> PriceMenu:
    return PriceMenu(tuple(
        MenuTier(o.tier_id, o.completion_time, float(p), o.node_count)
        for o, p in zip(options, prices)
    ))


@dataclass(frozen=True)
class Choice:
    selected: Optional[str]
    surplus: float = 0.0


@dataclass(frozen=True)
class MonteCarlo:
    n: int
    seed: int = 0

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError("Monte Carlo sample count must be positive")


@dataclass(frozen=True)
class Quadrature:
    resolution: int = 512

    def __post_init__(self):
        if self.resolution <= 0:
            raise ValueError("quadrature resolution must be positive")


Estimator = Union[MonteCarlo, Quadrature]


def choose(r: WtpRealization, menu: PriceMenu) -> Choice:
    best = None
    best_surplus = 0.0
    for tier in menu.tiers:  # ordered fast to slow, so strict '>' keeps ties on the faster tier
        surplus = float(wtp_curve(r.max_wtp, r.deadline, tier.completion_time)) - tier.price
        if surplus < 0:
            continue
        if best is None or surplus > best_surplus:
            best, best_surplus = tier.tier_id, surplus
    if best is None:
        return Choice(None, 0.0)
    return Choice(best, best_surplus)


def choice_codes(max_wtp, deadline, times: Sequence[float], prices) -> np.ndarray:
    """Vectorized ``choose``: index of the chosen tier, or ``NONE_CODE``.

    ``max_wtp`` and ``deadline`` broadcast against the leading axes of
    ``prices``, whose last axis runs over the tiers in ``times`` order.
    """
    prices = np.asarray(prices, dtype=float)
    surplus = np.stack(
        [wtp_curve(max_wtp, deadline, t) - prices[..., i] for i, t in enumerate(times)],
        axis=-1,
    )
    codes = np.argmax(surplus, axis=-1)  # first max wins ties
    best = np.take_along_axis(surplus, codes[..., None], axis=-1)[..., 0]
    return np.where(best >= 0, codes, NONE_CODE)


def _lower_bound(coef, price):
    # smallest M with M * coef >= price, as an extended real
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = price / coef
    return np.where(coef > 0, ratio, np.where(price <= 0, -np.inf, np.inf))


def _interval_mass(lo, hi, m_l, m_u):
    lo = np.maximum(lo, m_l)
    hi = np.minimum(hi, m_u)
    return np.clip(hi - lo, 0.0, None) / (m_u - m_l)


def deadline_nodes(ct: CustomerType, resolution: int) -> np.ndarray:
    d_l, d_u = ct.deadline_range
    if ct.degenerate_deadline:
        return np.array([d_l])
    return d_l + (np.arange(resolution) + 0.5) * (d_u - d_l) / resolution


def tier_probabilities(ct: CustomerType, times: Sequence[float], prices,
                       method: Estimator) -> np.ndarray:
    """Choice probabilities for many price vectors at once.

    ``prices`` has shape ``(P, len(times))``; the result has the same shape
    and holds the probability of each tier being chosen.
    """
    times = tuple(float(t) for t in times)
    prices = np.atleast_2d(np.asarray(prices, dtype=float))
    if prices.shape[1] != len(times):
        raise ValueError("price columns must match the tier count")
    if isinstance(method, MonteCarlo):
        return _mc_probabilities(ct, times, prices, method)
    if isinstance(method, Quadrature):
        return _quad_probabilities(ct, times, prices, method)
    raise TypeError(f"unknown estimator {method!r}")


def _mc_probabilities(ct, times, prices, method: MonteCarlo):
    rng = np.random.default_rng((method.seed, ct.id))
    m_l, m_u = ct.max_wtp_range
    d_l, d_u = ct.deadline_range
    M = rng.uniform(m_l, m_u, method.n)
    D = rng.uniform(d_l, d_u, method.n)
    out = np.empty_like(prices)
    chunk = max(1, 2_000_000 // method.n)
    for start in range(0, len(prices), chunk):
        block = prices[start:start + chunk]
        codes = choice_codes(M[None, :], D[None, :], times, block[:, None, :])
        for i in range(len(times)):
            out[start:start + chunk, i] = np.mean(codes == i, axis=1)
    return out


def _quad_probabilities(ct, times, prices, method: Quadrature):
    D = deadline_nodes(ct, method.resolution)[None, :]
    m_l, m_u = ct.max_wtp_range
    out = np.empty_like(prices)
    if ct.degenerate_wtp:
        # point mass in M: evaluate the choice rule directly at each deadline node
        codes = choice_codes(m_l, D, times, prices[:, None, :])
        for i in range(len(times)):
            out[:, i] = np.mean(codes == i, axis=1)
        return out

    slope = [np.maximum(D - t, 0.0) / (D - 1.0) for t in times]
    if len(times) == 1:
        out[:, 0] = _interval_mass(_lower_bound(slope[0], prices[:, :1]), np.inf, m_l, m_u).mean(axis=1)
        return out

    p_f, p_s = prices[:, :1], prices[:, 1:]
    gap = slope[0] - slope[1]
    premium = p_f - p_s
    # fast: W_f >= p_f and W_f - p_f >= W_s - p_s; slow: W_s >= p_s and the second fails
    switch = _lower_bound(gap, premium)
    fast_lo = np.maximum(_lower_bound(slope[0], p_f), switch)
    slow_lo = _lower_bound(slope[1], p_s)
    out[:, 0] = _interval_mass(fast_lo, np.inf, m_l, m_u).mean(axis=1)
    out[:, 1] = _interval_mass(slow_lo, switch, m_l, m_u).mean(axis=1)
    return out


def purchase_probabilities(ct: CustomerType, menu: PriceMenu,
                           method: Estimator) -> tuple[float, float]:
    """``(q_fast, q_slow)`` for one customer type; an absent tier has probability 0."""
    q = tier_probabilities(ct, menu.times, [menu.prices], method)[0]
    result = {tier.tier_id: float(q[i]) for i, tier in enumerate(menu.tiers)}
    return result.get(FAST, 0.0), result.get(SLOW, 0.0)
