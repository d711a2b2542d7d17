from collections import deque

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=50, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

_CRITERIA = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion's outcome for the terminal summary.

    Usage: ``criterion("A1", "detail text")`` after the asserts pass; a test
    that fails before calling it is reported as FAIL.
    """
    name = request.node.name
    _CRITERIA[name] = ("FAIL", name, "")

    def record(label, detail=""):
        _CRITERIA[name] = ("PASS", label, detail)

    yield record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, (status, label, detail) in sorted(_CRITERIA.items(), key=lambda kv: kv[1][1]):
        terminalreporter.write_line(f"{status} {label:<4} {name} {detail}")


def bfs_components(neighbors):
    """Connected components of the symmetrized neighbor graph by breadth-first search."""
    p = len(neighbors)
    adj = [set() for _ in range(p)]
    for i, row in enumerate(neighbors):
        for j in row:
            adj[i].add(int(j))
            adj[int(j)].add(i)
    seen = [False] * p
    count = 0
    for start in range(p):
        if seen[start]:
            continue
        count += 1
        queue = deque([start])
        seen[start] = True
        while queue:
            i = queue.popleft()
            for j in adj[i]:
                if not seen[j]:
                    seen[j] = True
                    queue.append(j)
    return count


def separated_blobs(c, per=5, seed=0, dim=3, gap=10.0):
    """``c`` tight point groups far apart: a k=2 graph has exactly ``c`` components."""
    rng = np.random.default_rng(seed)
    pts = [gap * i + 0.1 * rng.random((dim, per)) for i in range(c)]
    return np.concatenate(pts, axis=1)


def two_triangles():
    return np.array([[0.0, 1.0, 0.5, 10.0, 11.0, 10.5], [0.0, 0.0, 0.9, 0.0, 0.0, 0.9]])
