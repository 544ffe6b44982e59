"""End-to-end verification: exact word and group-algebra identities, then numeric checks."""

from __future__ import annotations

import cmath
import hashlib
import json
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .automorphism import TwistedAutomorphism, build_phi
from .diagonalizer import FAULTS, CheckResult, DiagonalisationResult, diagonalize
from .freegroup import FreeWord
from .grpalg import GroupAlgebraElement
from .nntree import SCHEMA, NNTree
from .ratexpr import TOL_ABS, TOL_REL, Evaluator, MatrixPoint, Verdict, compare_many
from .scalar import Coefficient


@dataclass
class VerifyConfig:
    sizes: tuple[int, ...] = (3, 4, 5)
    samples: int = 5
    seed: int = 0
    tol_rel: float = TOL_REL
    tol_abs: float = TOL_ABS
    nek2_samples: int = 20
    faults: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {"sizes": list(self.sizes), "samples": self.samples, "seed": self.seed,
                "tol_rel": self.tol_rel, "tol_abs": self.tol_abs, "nek2_samples": self.nek2_samples,
                "faults": list(self.faults)}


# -- twists -----------------------------------------------------------------------


@dataclass
class Twist:
    """Letter -> single-term scalar, plus numeric values for the symbols involved."""

    scalars: dict[str, Coefficient] = field(default_factory=dict)
    values: dict[str, complex] = field(default_factory=dict)

    def symbols(self) -> set[str]:
        out: set[str] = set()
        for c in self.scalars.values():
            out |= {s for s in c.symbols() if not s.startswith("@")}
        return out

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "twist": {s: str(c) for s, c in sorted(self.scalars.items())},
            "values": {s: _complex_json(v) for s, v in sorted(self.values.items())},
        }


def _complex_json(z: complex) -> float | list[float]:
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def _read_complex(v: Any) -> complex:
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, str):
        return complex(v.replace(" ", "").replace("i", "j"))
    raise ValueError(f"cannot read a complex number from {v!r}")


def _auto_symbol(letter: str) -> str:
    return "t_" + letter.replace(".", "_")


def load_twist(obj: Mapping[str, Any] | None) -> Twist:
    """Read a twist document ``{"twist": {letter: scalar}, "values": {symbol: number}}``.

    A bare ``{letter: scalar}`` mapping is accepted too.  Scalars are strings
    in the textual form or scalar JSON objects; a literal number (or a
    ``[re, im]`` pair) becomes a fresh symbol bound to that number, so the
    synthesis itself stays exact.
    """
    if not obj:
        return Twist()
    obj = dict(obj)
    if "twist" in obj:
        raw = obj["twist"]
    else:
        raw = {k: v for k, v in obj.items() if k not in ("schema", "values")}
    tw = Twist(values={s: _read_complex(v) for s, v in obj.get("values", {}).items()})
    for letter, val in raw.items():
        if isinstance(val, (int, float, list)) and not isinstance(val, bool):
            sym = _auto_symbol(letter)
            tw.scalars[letter] = Coefficient.symbol(sym)
            tw.values[sym] = _read_complex(val)
        else:
            tw.scalars[letter] = Coefficient.from_json(val)
    return tw


def random_values(symbols: Sequence[str], seed: int) -> dict[str, complex]:
    """Nonzero complex values with modulus in [1/2, 2], reproducible from ``seed``."""
    rng = np.random.default_rng([seed, 7919])
    out = {}
    for s in sorted(symbols):
        r = 0.5 + 1.5 * rng.random()
        out[s] = complex(cmath.rect(r, 2 * np.pi * rng.random()))
    return out


def random_twist(letters: Sequence[str], rng: random.Random, density: float = 0.7) -> Twist:
    """A symbol on a random subset of letters; values drawn from the same stream."""
    tw = Twist()
    for s in letters:
        if rng.random() < density:
            sym = _auto_symbol(s)
            tw.scalars[s] = Coefficient.symbol(sym)
            tw.values[sym] = cmath.rect(rng.uniform(0.5, 2.0), rng.uniform(0, 2 * cmath.pi))
    return tw


# -- report -------------------------------------------------------------------------


@dataclass
class VerificationReport:
    tree_digest: str
    n1: int
    letters: int
    generators: int
    eigenvalues: list[str]
    twist: Twist
    config: VerifyConfig
    checks: list[dict]

    @property
    def invariant_generator_count(self) -> int:
        return self.n1 * (self.letters - 1) + 1

    @property
    def passed(self) -> bool:
        return all(c["status"] == "pass" for c in self.checks)

    @property
    def summary(self) -> str:
        return "pass" if self.passed else "fail"

    def failures(self) -> list[dict]:
        return [c for c in self.checks if c["status"] != "pass"]

    def check(self, name: str) -> dict:
        for c in self.checks:
            if c["name"] == name:
                return c
        raise KeyError(name)

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "tree_digest": self.tree_digest,
            "n1": self.n1,
            "letters": self.letters,
            "generators": self.generators,
            "invariant_generator_count": self.invariant_generator_count,
            "eigenvalues": self.eigenvalues,
            "twist": self.twist.to_json(),
            "config": self.config.to_json(),
            "summary": self.summary,
            "checks": self.checks,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=False)


def tree_digest(tree: NNTree) -> str:
    body = json.dumps(tree.to_json(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(body.encode()).hexdigest()[:16]


def _numeric_entry(name: str, v: Verdict) -> dict:
    body = v.to_json()
    body["verdict"] = body.pop("status")
    return {"name": name, "level": "numeric", "status": "pass" if v.ok else "fail", **body}


def _exact_entry(name: str, ok: bool, detail: str = "", **data) -> dict:
    return CheckResult(name, "exact", ok, detail, data).to_json()


# -- individual check groups ----------------------------------------------------------


def _word_lemmas(aut: TwistedAutomorphism, cfg: VerifyConfig) -> list[dict]:
    """Sampled word identities for the M_d products, plus lambda bookkeeping."""
    tree = aut.tree
    out: list[dict] = []
    for v in tree.vertices:
        lam, u = aut.lam(v.id, verify=False)
        brute = aut.lambda_oracle(v.id)
        ok = brute == lam and lam % v.beta == 0 and v.gamma % lam == 0 and u * v.beta == lam
        out.append(_exact_entry(f"lambda.{v.id}", ok, "" if ok else f"recursion {lam}, oracle {brute}",
                                value=lam, oracle=brute, beta=v.beta, gamma=v.gamma))
    for p in tree.pairs:
        try:
            u, w = aut.u_v(p, verify=True)
            out.append(_exact_entry(f"uv.{p.label}", True, u=u, v=w))
        except Exception as exc:  # oracle mismatch is a report entry
            out.append(_exact_entry(f"uv.{p.label}", False, str(exc)))

    rng = random.Random(f"{cfg.seed}:words:{tree_digest(tree)}")
    names = ("shift_identity", "product_identity", "stride_identity", "period_identity", "twist_bookkeeping")
    fails: dict[str, dict | None] = {k: None for k in names}
    count = 0
    if tree.vertices:
        for _ in range(cfg.nek2_samples):
            v = rng.choice(tree.vertices)
            d, c, b, t, a = v.id, v.parent, v.beta, v.tau, v.alpha
            lam, _ = aut.lam(d, verify=False)
            i = rng.randrange(0, 2 * t * lam + 1)
            j = rng.randrange(0, 3 * lam + 1)
            k = rng.randrange(0, 4)
            count += 1
            sample = {"vertex": d, "i": i, "j": j, "k": k}
            results = {
                "shift_identity": aut.D(d, (b + j) * t)
                == aut.M(d, 0, b + j).inverse() * aut.M(d, 0, j + 1) * aut.M(c, (j + 1) * t, a),
                "product_identity": aut.M(d, 0, b + j) == aut.M(d, 0, j) * aut.M(c, j * t, a),
                "stride_identity": aut.M(d, i, k * b + j) == aut.M(d, i, j) * aut.M(c, j * t + i, k * a),
                "period_identity": aut.M(d, i, lam).is_identity(),
                "twist_bookkeeping": _as_ga(aut.apply(aut.M(d, i, j)))
                == GroupAlgebraElement.word(aut.M(d, i + 1, j), aut.m(d, i + 1, j)),
            }
            for name, ok in results.items():
                if not ok and fails[name] is None:
                    fails[name] = sample
    for name in names:
        w = fails[name]
        out.append(_exact_entry(f"words.{name}", w is None, "" if w is None else "identity fails",
                                samples=count, **({"witness": w} if w else {})))
    return out


def _as_ga(x: FreeWord | GroupAlgebraElement) -> GroupAlgebraElement:
    return x if isinstance(x, GroupAlgebraElement) else GroupAlgebraElement.word(x)


def _numeric_checks(res: DiagonalisationResult, values: Mapping[str, complex], cfg: VerifyConfig) -> list[dict]:
    aut = res.aut
    gens = res.generators
    letters = list(aut.alphabet)
    images = [aut.apply(g.expr) for g in gens]
    out: list[dict] = []
    if not gens:
        return out

    def eigen_pairs(pt: MatrixPoint, arith):
        ev = Evaluator(pt, values, arith)
        for g, img in zip(gens, images):
            yield g.name, ev(img), ev.scalar(g.eigenvalue) * ev(g.expr)

    def letters_roundtrip(pt: MatrixPoint, arith):
        ev = Evaluator(pt, values, arith)
        ev2 = Evaluator(MatrixPoint(pt.size, {g.name: ev(g.expr) for g in gens}), values, arith)
        for s in letters:
            yield s, ev2(res.inverse[s]), ev.letter(s, 1)

    def generators_roundtrip(pt: MatrixPoint, arith):
        ev = Evaluator(pt, values, arith)
        ev2 = Evaluator(MatrixPoint(pt.size, {s: ev(res.inverse[s]) for s in letters}), values, arith)
        for g in gens:
            yield g.name, ev2(g.expr), ev.letter(g.name, 1)

    common = dict(trials=cfg.samples, sizes=cfg.sizes, seed=cfg.seed, tol_rel=cfg.tol_rel, tol_abs=cfg.tol_abs)
    for prefix, fn, names in (
        ("numeric.eigen", eigen_pairs, letters),
        ("numeric.roundtrip.letter", letters_roundtrip, letters),
        ("numeric.roundtrip.generator", generators_roundtrip, [g.name for g in gens]),
    ):
        verdicts = compare_many(fn, names, **common)
        labels = [g.name for g in gens] if prefix != "numeric.roundtrip.letter" else letters
        for label in labels:
            v = verdicts.get(label) or Verdict("degenerate", 0.0, 0.0, cfg.samples, tuple(cfg.sizes), cfg.seed)
            out.append(_numeric_entry(f"{prefix}.{label}", v))
    return out


# -- driver ---------------------------------------------------------------------------


def verify_all(tree: NNTree, twist: Twist | Mapping[str, Any] | None = None,
               config: VerifyConfig | None = None) -> VerificationReport:
    """Run every check and collect the results; failures become report entries, never exceptions."""
    cfg = config or VerifyConfig()
    bad = set(cfg.faults) - set(FAULTS)
    if bad:
        raise ValueError(f"unknown fault injections {sorted(bad)}; choose from {FAULTS}")
    if not isinstance(twist, Twist):
        twist = load_twist(twist)
    checks: list[dict] = []
    base = build_phi(tree, check_order=False)
    checks.append(_exact_entry("tree.validation", True, vertices=len(tree.vertices), pairs=len(tree.pairs),
                               letters=len(base.alphabet)))

    rep = base.order_report()
    checks.append(_exact_entry("order", rep["ok"], "" if rep["ok"] else f"order {rep['order']} but n1 = {rep['n1']}",
                               order=rep["order"], n1=rep["n1"],
                               proper_divisors=[m for m in sorted(rep["proper_divisors_nontrivial"])]))
    if not rep["ok"]:
        return VerificationReport(tree_digest(tree), base.n1, len(base.alphabet), 0, [], twist, cfg, checks)

    try:
        aut = base.twisted(twist.scalars)
    except ValueError as exc:
        checks.append(_exact_entry("twist", False, str(exc)))
        checks.extend(_word_lemmas(base, cfg))
        return VerificationReport(tree_digest(tree), base.n1, len(base.alphabet), 0, [], twist, cfg, checks)
    checks.extend(_word_lemmas(aut, cfg))

    values = dict(twist.values)
    missing = twist.symbols() - set(values)
    values.update(random_values(sorted(missing), cfg.seed))
    twist = Twist(dict(twist.scalars), values)

    try:
        res = diagonalize(aut, faults=cfg.faults, strict=False)
    except Exception as exc:  # reported, not raised
        checks.append(_exact_entry("synthesis", False, f"{type(exc).__name__}: {exc}"))
        return VerificationReport(tree_digest(tree), base.n1, len(base.alphabet), 0, [], twist, cfg, checks)
    checks.extend(c.to_json() for c in res.checks)
    checks.extend(_numeric_checks(res, values, cfg))
    return VerificationReport(tree_digest(tree), base.n1, len(base.alphabet), len(res.generators),
                              [str(g.eigenvalue) for g in res.generators], twist, cfg, checks)
