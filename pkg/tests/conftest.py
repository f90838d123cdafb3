from pathlib import Path

import numpy as np
import pytest

from probcsp.core import ConstraintNetwork, RemovalProfile, read_network, read_profile

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def star():
    net = read_network(FIXTURES / "star.json")
    return net, read_profile(net, FIXTURES / "star_events.json")


@pytest.fixture
def pair():
    net = read_network(FIXTURES / "pair.json")
    return net, read_profile(net, FIXTURES / "pair_events.json")


def random_profile(rng: np.random.Generator, net: ConstraintNetwork, p_event: float = 0.5) -> RemovalProfile:
    return RemovalProfile(tuple(
        int(rng.integers(0, net.domain_size(i) + 1)) if rng.random() < p_event else 0
        for i in range(net.n)
    ))


# one "PASS"/"FAIL" line per acceptance criterion, shown at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
