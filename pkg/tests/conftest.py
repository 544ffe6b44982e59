from __future__ import annotations

import random

import pytest

from nfdiag.automorphism import build_phi
from nfdiag.nntree import validate_tree


def single_vertex_tree(n: int):
    return validate_tree({"n": n, "vertices": [{"id": "b", "parent": "a", "tau": 1, "gamma": n, "beta": n, "alpha": n}],
                          "pairs": []})


@pytest.fixture(scope="session")
def tree22():
    return single_vertex_tree(2)


@pytest.fixture(scope="session")
def tree33():
    return single_vertex_tree(3)


@pytest.fixture(scope="session")
def root_pair_tree():
    return validate_tree({"n": 2, "vertices": [], "pairs": [{"e": "a", "f": "a", "delta": 2, "rho": 2, "eta": 0}]})


@pytest.fixture(scope="session")
def chain_tree():
    # depth-2 chain, n = 4
    return validate_tree({"n": 4, "vertices": [
        {"id": "b", "parent": "a", "tau": 1, "gamma": 4, "beta": 2, "alpha": 2},
        {"id": "c", "parent": "b", "tau": 1, "gamma": 4, "beta": 2, "alpha": 2},
    ], "pairs": []})


@pytest.fixture(scope="session")
def aut33(tree33):
    return build_phi(tree33)


def corpus(count: int, seed: int = 2024):
    """Seeded random valid trees: n <= 12, at most 4 non-root vertices and 2 pair families."""
    from nfdiag.nntree import random_tree

    rng = random.Random(seed)
    return [random_tree(rng, n_max=12, max_vertices=4, max_pairs=2) for _ in range(count)]


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = next((m for k, m in sys.modules.items() if k.endswith("test_acceptance")), None)
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
