import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hcpd.graph import CommunityAssignment, DynamicNetwork, Snapshot

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_snapshot(rng, n, p=0.3, t=1, binary=False):
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < p
    w = np.ones(keep.sum()) if binary else rng.uniform(0.05, 1.0, keep.sum())
    return Snapshot(t, n, iu[keep], ju[keep], w)


def two_cliques_and_bridge(size=10):
    edges = [(u, v, 1.0) for u, v in itertools.combinations(range(size), 2)]
    edges += [(u + size, v + size, 1.0) for u, v, _ in edges]
    edges.append((size - 1, size, 1.0))
    return Snapshot.from_edges(1, 2 * size, edges)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def two_blocks():
    return CommunityAssignment([0] * 6 + [1] * 4)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results):
        terminalreporter.write_line(results[key])
