import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from womctl.fixtures import instance_a, instance_b
from womctl.topology import min_delay_matrix


@pytest.fixture(scope="session")
def inst_a():
    topo, s = instance_a()
    return topo, s, min_delay_matrix(topo)


@pytest.fixture(scope="session")
def inst_b():
    topo, s = instance_b()
    return topo, s, min_delay_matrix(topo)


@pytest.fixture(scope="session")
def solved():
    """Solver results shared by the acceptance criteria (computed once)."""
    cache = {}

    def get(key, fn):
        if key not in cache:
            cache[key] = fn()
        return cache[key]

    return get
