"""Customer types, the willingness-to-pay curve, and private draws.

A customer's willingness to pay falls linearly from ``M`` at a completion
time of one minute to nothing at the deadline ``D``::

    W(t) = max(D - t, 0) * M / (D - 1)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

MIX_TOLERANCE = 1e-9


@dataclass(frozen=True)
class CustomerType:
    id: int
    probability: float
    max_wtp_range: tuple[float, float]
    deadline_range: tuple[float, float]  # minutes

    def __post_init__(self):
        m_l, m_u = self.max_wtp_range
        d_l, d_u = self.deadline_range
        object.__setattr__(self, "max_wtp_range", (float(m_l), float(m_u)))
        object.__setattr__(self, "deadline_range", (float(d_l), float(d_u)))
        if not 0 <= m_l <= m_u:
            raise ValueError(f"type {self.id}: need 0 <= m_l <= m_u, got {self.max_wtp_range}")
        if not 1 < d_l <= d_u:
            raise ValueError(f"type {self.id}: need 1 < d_l <= d_u, got {self.deadline_range}")
        if not 0 < self.probability <= 1:
            raise ValueError(f"type {self.id}: probability must be in (0, 1]")

    @property
    def degenerate_wtp(self) -> bool:
        return self.max_wtp_range[0] == self.max_wtp_range[1]

    @property
    def degenerate_deadline(self) -> bool:
        return self.deadline_range[0] == self.deadline_range[1]


@dataclass(frozen=True)
class CustomerMix:
    types: tuple[CustomerType, ...]

    def __post_init__(self):
        object.__setattr__(self, "types", tuple(self.types))
        if not self.types:
            raise ValueError("customer mix needs at least one type")
        ids = [ct.id for ct in self.types]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate customer type ids: {ids}")
        total = sum(ct.probability for ct in self.types)
        if abs(total - 1.0) > MIX_TOLERANCE:
            raise ValueError(f"customer type probabilities sum to {total}, not 1")

    def __iter__(self):
        return iter(self.types)

    def __len__(self):
        return len(self.types)

    def by_id(self, type_id: int) -> CustomerType:
        for ct in self.types:
            if ct.id == type_id:
                return ct
        raise KeyError(type_id)

    @property
    def max_wtp_upper(self) -> float:
        return max(ct.max_wtp_range[1] for ct in self.types)


@dataclass(frozen=True)
class WtpRealization:
    """One customer's private draw. Never handed to the pricing side."""

    max_wtp: float
    deadline: float

    def __post_init__(self):
        if self.max_wtp < 0:
            raise ValueError("max_wtp must be nonnegative")
        if not self.deadline > 1:
            raise ValueError("deadline must exceed 1 minute")


def wtp_curve(max_wtp, deadline, t):
    """Array form of the WTP curve; broadcasts over all arguments.

    Shared by ``wtp_value`` and the vectorized buyer model so both agree
    bit for bit on tie cases.
    """
    return np.maximum(deadline - t, 0.0) * max_wtp / (deadline - 1.0)


def wtp_value(r: WtpRealization, t: float) -> float:
    if t < 0:
        raise ValueError("completion time must be nonnegative")
    return float(wtp_curve(r.max_wtp, r.deadline, float(t)))


def sample_realization(ct: CustomerType, rng: np.random.Generator) -> WtpRealization:
    m_l, m_u = ct.max_wtp_range
    d_l, d_u = ct.deadline_range
    return WtpRealization(max_wtp=float(rng.uniform(m_l, m_u)), deadline=float(rng.uniform(d_l, d_u)))


def categorical_index(probabilities: Sequence[float], rng: np.random.Generator) -> int:
    cdf = np.cumsum(probabilities)
    u = rng.random() * cdf[-1]
    return min(int(np.searchsorted(cdf, u, side="right")), len(cdf) - 1)


def sample_customer_type(mix: CustomerMix, rng: np.random.Generator) -> CustomerType:
    return mix.types[categorical_index([ct.probability for ct in mix.types], rng)]
