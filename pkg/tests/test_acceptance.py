"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Run standalone with ``python tests/test_acceptance.py`` or through pytest,
where the lines are repeated in the terminal summary.
"""

from __future__ import annotations

import random
import sys
import time
from fractions import Fraction

import pytest

from nfdiag.automorphism import build_phi
from nfdiag.cli import PRESETS
from nfdiag.diagonalizer import FAULTS, diagonalize
from nfdiag.grpalg import GroupAlgebraElement as GA
from nfdiag.nntree import random_tree, validate_tree
from nfdiag.ratexpr import Inverse, Product, Scale, Sum, const, leaf, probable_equal
from nfdiag.scalar import Coefficient as C
from nfdiag.verifier import VerifyConfig, load_twist, random_twist, verify_all

CORPUS_SIZE = 50
CORPUS_SEED = 2024
RESULTS: list[str] = []


def report(number: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def corpus() -> list:
    rng = random.Random(CORPUS_SEED)
    return [random_tree(rng, n_max=12, max_vertices=4, max_pairs=2) for _ in range(CORPUS_SIZE)]


def single_vertex(n: int):
    return validate_tree({"n": n, "vertices": [{"id": "b", "parent": "a", "tau": 1, "gamma": n, "beta": n,
                                                "alpha": n}], "pairs": []})


def test_criterion_1_order_two_example():
    start = time.perf_counter()
    res = diagonalize(build_phi(single_vertex(2)).twisted({"b.0": "c"}))
    gens = res.generators
    rc = C.symbol("c", Fraction(1, 2))
    x = GA.letter("b.0")
    target = Product((Inverse(leaf(GA.scalar(rc) + x)), leaf(GA.scalar(rc) - x)))
    verdict = probable_equal(gens[0].expr, target, trials=5, sizes=(2, 3, 4), values={"c": 2}, tol_rel=1e-8)
    elapsed = time.perf_counter() - start
    ok = len(gens) == 1 and verdict.ok and gens[0].eigenvalue == C.rational(-1) and elapsed < 1.0
    report(1, ok, f"{len(gens)} generator, eigenvalue {gens[0].eigenvalue}, {verdict.status} "
                  f"(max rel {verdict.max_relative:.1e}), {elapsed:.2f}s")


def test_criterion_2_order_three_example():
    start = time.perf_counter()
    res = diagonalize(build_phi(single_vertex(3)).twisted({"b.0": "c", "b.1": "d"}))
    vd = res.vertices["b"]
    x1 = C.symbol("c", Fraction(-2, 3)) * C.symbol("d", Fraction(-1, 3))
    x2 = C.symbol("c", Fraction(-1, 3)) * C.symbol("d", Fraction(-2, 3))
    coeffs_ok = vd.x[0][1] == x1 and vd.x[0][2] == x2
    omega = C.root_of_unity(1, 3)
    eig_ok = sorted(str(g.eigenvalue) for g in res.generators) == sorted([str(omega**2), str(omega)])
    y1, y2 = vd.Y[(0, 1)], vd.Y[(0, 2)]
    lhs = Scale(C.rational(2), Inverse(Sum((y1, y2, const(1)))))
    b0, b01 = GA.letter("b.0"), GA.letter("b.0") * GA.letter("b.1")
    rhs = leaf(GA.one() + b0.scale(x1) + b01.scale(x2))
    verdict = probable_equal(lhs, rhs, trials=5, sizes=(3, 4), values={"c": 2, "d": 5}, tol_rel=1e-8)
    elapsed = time.perf_counter() - start
    ok = coeffs_ok and eig_ok and verdict.ok and elapsed < 2.0
    report(2, ok, f"coefficients {'exact' if coeffs_ok else 'WRONG'}, eigenvalues "
                  f"{'ok' if eig_ok else 'WRONG'}, identity with constant 2: {verdict.status} "
                  f"(max rel {verdict.max_relative:.1e}), {elapsed:.2f}s")


def test_criterion_3_order_theorem():
    start = time.perf_counter()
    trees = corpus()
    bad = []
    for n, tree in enumerate(trees):
        assert tree.n <= 12 and len(tree.vertices) <= 4 and len(tree.pairs) <= 2
        rep = build_phi(tree, check_order=False).order_report()
        if not rep["ok"]:
            bad.append((n, rep))
    elapsed = time.perf_counter() - start
    report(3, not bad and elapsed < 60.0, f"{len(trees) - len(bad)}/{len(trees)} trees with order = n1 and "
                                          f"nontrivial proper divisors, {elapsed:.1f}s")


def test_criterion_4_word_lemmas():
    from nfdiag.verifier import _word_lemmas

    cfg = VerifyConfig(nek2_samples=20)
    trees = corpus()
    failed = []
    samples = 0
    vertices = 0
    for n, tree in enumerate(trees):
        aut = build_phi(tree)
        for entry in _word_lemmas(aut, cfg):
            name = entry["name"]
            if name.startswith("words."):
                if name.split(".")[1] in ("shift_identity", "product_identity", "stride_identity"):
                    samples = samples + entry["samples"] if name == "words.shift_identity" else samples
                    if tree.vertices and entry["samples"] < 20:
                        failed.append((n, name, "too few samples"))
            elif name.startswith("lambda."):
                vertices += 1
            if entry["status"] != "pass":
                failed.append((n, name, entry.get("detail")))
    report(4, not failed, f"{samples} samples over {len(trees)} trees, {vertices} vertices with lambda "
                          f"oracle and divisibility checks, {len(failed)} failures")


def test_criterion_5_diagonalisation():
    start = time.perf_counter()
    trees = corpus()
    rng = random.Random(CORPUS_SEED + 1)
    cfg = VerifyConfig(sizes=(3, 4, 5), samples=5, seed=0)
    failed = []
    for n, tree in enumerate(trees):
        letters = list(build_phi(tree).alphabet)
        rep = verify_all(tree, random_twist(letters, rng), cfg)
        if not rep.passed or rep.generators != len(letters):
            failed.append((n, [c["name"] for c in rep.failures()]))
    elapsed = time.perf_counter() - start
    report(5, not failed and elapsed < 300.0, f"{len(trees) - len(failed)}/{len(trees)} trees verified "
                                              f"at sizes 3,4,5, {elapsed:.1f}s"
                                              + (f"; failures {failed[:3]}" if failed else ""))


def test_criterion_6_fault_injection():
    missed = []
    for name in ("ex1", "ex2"):
        tree, twist = validate_tree(PRESETS[name]), load_twist(PRESETS[name]["twist"])
        for fault in FAULTS:
            rep = verify_all(tree, twist, VerifyConfig(faults=(fault,)))
            if rep.summary != "fail":
                missed.append((name, fault))
    report(6, not missed, f"{2 * len(FAULTS) - len(missed)}/{2 * len(FAULTS)} injected faults detected")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
