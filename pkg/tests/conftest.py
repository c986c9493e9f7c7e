import numpy as np
import pytest

from qossim import CustomerMix, CustomerType, JobCatalog, JobType, TierShape

TABLE1 = ((1, (100.0, 120.0), (20.0, 30.0)), (2, (45.0, 55.0), (60.0, 70.0)))


@pytest.fixture
def table1_mix():
    return CustomerMix(tuple(CustomerType(i, 0.5, m, d) for i, m, d in TABLE1))


@pytest.fixture
def point_mass_mix():
    return CustomerMix((CustomerType(1, 1.0, (100, 100), (30, 30)),))


@pytest.fixture
def io_job():
    return JobType("IO", TierShape(10, 23), TierShape(3, 51), 0.5)


@pytest.fixture
def cpu_job():
    return JobType("CPU", TierShape(10, 5), TierShape(3, 9), 0.5)


@pytest.fixture
def table2_catalog(io_job, cpu_job):
    return JobCatalog((io_job, cpu_job))


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


def pytest_terminal_summary(terminalreporter):
    from acceptance_report import RESULTS
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in RESULTS:
        terminalreporter.write_line(line)
