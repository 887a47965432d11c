import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qttpde.tt import MatrixProductOperator, TensorTrain

settings.register_profile(
    "qttpde", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("qttpde")


def random_tt(rng, c, rank=3):
    ranks = [1] + [min(rank, 2 ** min(k, c - k)) for k in range(1, c)] + [1]
    return TensorTrain([rng.standard_normal((ranks[k], 2, ranks[k + 1])) for k in range(c)])


def random_mpo(rng, c, rank=2):
    ranks = [1] + [rank] * (c - 1) + [1]
    return MatrixProductOperator([rng.standard_normal((ranks[k], 2, 2, ranks[k + 1])) for k in range(c)])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# ---- acceptance reporting -------------------------------------------------------

SESSION = {"start": None, "failed": [], "properties": [], "criteria": {}}


def pytest_sessionstart(session):
    import time
    SESSION["start"] = time.perf_counter()


def pytest_collection_modifyitems(session, config, items):
    # acceptance criteria run last so the suite-level criterion sees every other result
    items.sort(key=lambda it: "test_acceptance.py" in it.nodeid)


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid:
        return
    if report.failed:
        SESSION["failed"].append(report.nodeid)
    elif report.when == "call" and "test_prop_" in report.nodeid:
        SESSION["properties"].append(report.nodeid)


def pytest_terminal_summary(terminalreporter):
    if SESSION["criteria"]:
        terminalreporter.section("acceptance criteria")
        for n in sorted(SESSION["criteria"]):
            terminalreporter.write_line(SESSION["criteria"][n])
