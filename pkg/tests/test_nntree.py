from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nfdiag.nntree import TreeValidationError, build_alphabet, compute_n1, random_tree, validate_tree


def test_examples_valid(tree22, tree33):
    assert tree22.vertex("b").beta == 2 and tree33.vertex("b").beta == 3


def test_gamma_one_rejected():
    with pytest.raises(TreeValidationError) as exc:
        validate_tree({"n": 2, "vertices": [{"id": "b", "parent": "a", "tau": 1, "gamma": 1, "beta": 2, "alpha": 2}],
                       "pairs": []})
    assert any("gamma" in e for e in exc.value.errors)


def test_every_violation_reported():
    raw = {"n": 6, "vertices": [
        {"id": "b", "parent": "a", "tau": 2, "gamma": 3, "beta": 2, "alpha": 4},  # beta does not divide gamma
        {"id": "c", "parent": "x", "tau": 1, "gamma": 6, "beta": 2, "alpha": 2},  # orphan
    ], "pairs": [{"e": "a", "f": "b", "delta": 1, "rho": 1, "eta": 0}]}  # e != f needs delta, rho > 1
    with pytest.raises(TreeValidationError) as exc:
        validate_tree(raw)
    errs = exc.value.errors
    assert len(errs) >= 3
    assert any("a->b" in e and "beta" in e for e in errs)
    assert any("orphan" in e for e in errs)
    assert any("pair" in e for e in errs)


def test_cycle_rejected():
    raw = {"n": 4, "vertices": [
        {"id": "b", "parent": "c", "tau": 1, "gamma": 4, "beta": 2, "alpha": 2},
        {"id": "c", "parent": "b", "tau": 1, "gamma": 4, "beta": 2, "alpha": 2},
    ], "pairs": []}
    with pytest.raises(TreeValidationError) as exc:
        validate_tree(raw)
    assert any("cycle" in e for e in exc.value.errors)


def test_n1_examples(tree22, tree33, root_pair_tree):
    assert compute_n1(tree22) == 2
    assert compute_n1(tree33) == 3
    assert compute_n1(validate_tree({"n": 2, "vertices": [], "pairs": []})) == 1
    assert compute_n1(root_pair_tree) == 2


def test_alphabet_examples(tree22, tree33, root_pair_tree):
    assert build_alphabet(tree22).letters == ("b.0",)
    assert build_alphabet(tree33).letters == ("b.0", "b.1")
    assert build_alphabet(root_pair_tree).letters == ("t.a.a.0.0", "t.a.a.0.1")


def test_alphabet_check():
    alpha = build_alphabet(validate_tree({"n": 2, "vertices": [], "pairs": []}))
    with pytest.raises(ValueError):
        alpha.check(["b.0"])


def test_json_round_trip(chain_tree):
    again = validate_tree(chain_tree.to_json())
    assert again == chain_tree
    assert chain_tree.to_json()["schema"] == "nfdiag/1"


def test_levels(chain_tree):
    assert chain_tree.level("a") == 0 and chain_tree.level("b") == 1 and chain_tree.level("c") == 2
    assert [v.id for v in chain_tree.level_order] == ["b", "c"]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_random_trees_validate_and_have_right_sizes(seed):
    tree = random_tree(random.Random(seed))
    assert validate_tree(tree.to_json()) == tree
    alpha = build_alphabet(tree)
    size = sum((v.beta - 1) * v.tau for v in tree.vertices) + sum(p.rho * tree.tau(p.f) for p in tree.pairs)
    assert len(alpha) == size == len(set(alpha.letters))
