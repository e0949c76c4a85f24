import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from regmatch.graph import Graph

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_graph(n: int, p: float, seed: int) -> Graph:
    """Erdos-Renyi graph used by property tests."""
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < p
    return Graph.from_edges(n, np.stack([iu[keep], ju[keep]], axis=1))


@pytest.fixture
def tmp_out(tmp_path):
    return str(tmp_path / "out")


ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    """Print and remember one acceptance line, then fail the test if ``ok`` is false."""
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    assert ok, line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
