"""Hand-traced three-job scenario shared by simulator and metrics tests.

Capacity 23, Bench rate 0.1 per node-minute, IO job only: fast tier costs
23.0 (10 nodes, 23 min), slow tier 15.3 (3 nodes, 51 min).

    t=0      M=100 D=60 -> fast, nodes 10, release 1380
    t=1      M=100 D=60 -> fast, nodes 10, release 1381
    t=2      M=120 D=70 -> only the slow tier fits (3 free) -> slow, release 3062
    t=3      cluster full -> rejected, no quote
    t=1380.5 first job released, 10 free, M=10 D=60 -> declines both tiers
"""

from qossim.catalog import JobType, TierShape
from qossim.pricing import FixedPrice
from qossim.simulator import ArrivalEvent, BenchStrategy, SimConfig
from qossim.wtp import WtpRealization

IO = JobType("IO", TierShape(10, 23), TierShape(3, 51))

ARRIVALS = [(0.0, 100, 60), (1.0, 100, 60), (2.0, 120, 70), (3.0, 100, 60), (1380.5, 10, 60)]


def trace():
    return [ArrivalEvent(t, i, IO, WtpRealization(M, D), 1) for i, (t, M, D) in enumerate(ARRIVALS)]


def config():
    return SimConfig(capacity=23, mean_iat=30, horizon=3600, strategy=BenchStrategy(FixedPrice(0.1)))


EXPECTED_DECISIONS = ["fast", "fast", "slow", "rejected", "declined"]
EXPECTED_REVENUE = 23.0 + 23.0 + 15.3
EXPECTED_NODE_MINUTES = 10 * 23 + 10 * 23 + 3 * 51
EXPECTED_UTILIZATION = EXPECTED_NODE_MINUTES * 60 / (23 * 3600)
EXPECTED_UTILITY = 2 * (37 * 100 / 59 - 23.0) + (19 * 120 / 69 - 15.3)
EXPECTED_ADMISSION = 4 / 5
EXPECTED_MAX_LOAD = 23
