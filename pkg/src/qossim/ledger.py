"""Node capacity bookkeeping with immediate-start admission (no queue)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable


@dataclass(frozen=True)
class Allocation:
    contract_id: Hashable
    nodes: int
    start: float
    release_time: float  # seconds


class ClusterLedger:
    """Live allocations on a fixed-size cluster.

    Not thread safe; callers that share a ledger must serialize access.
    """

    def __init__(self, capacity: int):
        if capacity < 0:
            raise ValueError("capacity must be nonnegative")
        self.capacity = int(capacity)
        self.allocations: dict[Hashable, Allocation] = {}

    def allocated(self, now: float) -> int:
        return sum(a.nodes for a in self.allocations.values() if a.release_time > now)

    def available(self, now: float) -> int:
        return self.capacity - self.allocated(now)

    def try_admit(self, nodes: int, now: float, duration: float, contract_id: Hashable) -> bool:
        if nodes < 1:
            raise ValueError("an allocation needs at least one node")
        if not duration > 0:
            raise ValueError("duration must be positive")
        if contract_id in self.allocations:
            raise ValueError(f"duplicate contract id {contract_id!r}")
        if self.available(now) < nodes:
            return False
        self.allocations[contract_id] = Allocation(contract_id, nodes, now, now + duration)
        return True

    def release_due(self, now: float) -> list:
        due = [cid for cid, a in self.allocations.items() if a.release_time <= now]
        for cid in due:
            del self.allocations[cid]
        return due

    def __repr__(self):
        return f"ClusterLedger(capacity={self.capacity}, live={len(self.allocations)})"
