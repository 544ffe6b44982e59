"""n,n1-trees: the combinatorial data of a periodic free-group automorphism."""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable

ROOT = "a"
SCHEMA = "nfdiag/1"

_VERTEX_ID = re.compile(r"[A-Za-z0-9_]+$")


class TreeValidationError(ValueError):
    """Raised with the complete list of violated constraints."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class VertexData:
    id: str
    parent: str
    tau: int
    gamma: int
    beta: int
    alpha: int


@dataclass(frozen=True)
class PairFamily:
    e: str
    f: str
    index: int
    delta: int
    rho: int
    eta: int

    @property
    def key(self) -> tuple[str, str, int]:
        return (self.e, self.f, self.index)

    @property
    def label(self) -> str:
        return f"{self.e}.{self.f}.{self.index}"


@dataclass(frozen=True)
class NNTree:
    n: int
    vertices: tuple[VertexData, ...] = ()
    pairs: tuple[PairFamily, ...] = ()

    @cached_property
    def _by_id(self) -> dict[str, VertexData]:
        return {v.id: v for v in self.vertices}

    def vertex(self, vid: str) -> VertexData:
        return self._by_id[vid]

    def has_vertex(self, vid: str) -> bool:
        return vid == ROOT or vid in self._by_id

    def gamma(self, vid: str) -> int:
        return self.n if vid == ROOT else self._by_id[vid].gamma

    def tau(self, vid: str) -> int:
        return 1 if vid == ROOT else self._by_id[vid].tau

    def parent(self, vid: str) -> str:
        return self._by_id[vid].parent

    def level(self, vid: str) -> int:
        depth = 0
        while vid != ROOT:
            vid = self._by_id[vid].parent
            depth += 1
        return depth

    def ancestors(self, vid: str) -> list[str]:
        """Strict ancestors of ``vid``, nearest first, ending at the root."""
        out = []
        while vid != ROOT:
            vid = self._by_id[vid].parent
            out.append(vid)
        return out

    @cached_property
    def level_order(self) -> tuple[VertexData, ...]:
        """Non-root vertices sorted by level, ties kept in input order."""
        return tuple(sorted(self.vertices, key=lambda v: self.level(v.id)))

    def to_json(self) -> dict[str, Any]:
        return {
            "schema": SCHEMA,
            "n": self.n,
            "vertices": [
                {"id": v.id, "parent": v.parent, "tau": v.tau, "gamma": v.gamma, "beta": v.beta, "alpha": v.alpha}
                for v in self.vertices
            ],
            "pairs": [
                {"e": p.e, "f": p.f, "delta": p.delta, "rho": p.rho, "eta": p.eta} for p in self.pairs
            ],
        }


def _int_field(obj: dict, key: str, where: str, errors: list[str]) -> int | None:
    val = obj.get(key)
    if isinstance(val, bool) or not isinstance(val, int):
        errors.append(f"{where}: field {key!r} must be an integer, got {val!r}")
        return None
    return val


def validate_tree(raw: dict[str, Any]) -> NNTree:
    """Check every constraint on raw tree data and build an :class:`NNTree`.

    All violations are collected; :class:`TreeValidationError` carries the
    full list, each entry naming the offending vertex or pair.
    """
    errors: list[str] = []
    if not isinstance(raw, dict):
        raise TreeValidationError(["tree description must be a JSON object"])
    n = _int_field(raw, "n", "tree", errors)
    if n is not None and n < 2:
        errors.append(f"tree: n must be >= 2, got {n}")
    raw_vertices = raw.get("vertices", [])
    raw_pairs = raw.get("pairs", [])
    if not isinstance(raw_vertices, list) or not isinstance(raw_pairs, list):
        raise TreeValidationError(errors + ["tree: 'vertices' and 'pairs' must be lists"])

    vertices: list[VertexData] = []
    seen: set[str] = set()
    for k, rv in enumerate(raw_vertices):
        where = f"vertex #{k}"
        if not isinstance(rv, dict):
            errors.append(f"{where}: must be an object")
            continue
        vid, parent = rv.get("id"), rv.get("parent", ROOT)
        if not isinstance(vid, str) or not _VERTEX_ID.match(vid):
            errors.append(f"{where}: id {vid!r} must be a nonempty alphanumeric string")
            continue
        where = f"vertex {vid}"
        if vid == ROOT:
            errors.append(f"{where}: id {ROOT!r} is reserved for the root")
            continue
        if vid in seen:
            errors.append(f"{where}: duplicate id")
            continue
        if vid == "t":
            errors.append(f"{where}: id 't' is reserved for pair letters")
            continue
        seen.add(vid)
        vals = [_int_field(rv, key, where, errors) for key in ("tau", "gamma", "beta", "alpha")]
        if not isinstance(parent, str):
            errors.append(f"{where}: parent must be a vertex id")
            continue
        if None in vals:
            continue
        vertices.append(VertexData(vid, parent, *vals))  # type: ignore[arg-type]

    by_id = {v.id: v for v in vertices}
    shape_ok = set()
    for v in vertices:
        if v.parent != ROOT and v.parent not in by_id:
            errors.append(f"vertex {v.id}: parent {v.parent!r} does not exist (orphan vertex)")
            continue
        chain, cur = {v.id}, v.parent
        while cur != ROOT:
            if cur in chain or cur not in by_id:
                break
            chain.add(cur)
            cur = by_id[cur].parent
        if cur != ROOT:
            if cur in chain:
                errors.append(f"vertex {v.id}: lies on a cycle, root not reachable")
            continue
        shape_ok.add(v.id)

    def gamma(vid: str) -> int | None:
        return n if vid == ROOT else by_id[vid].gamma

    def tau(vid: str) -> int:
        return 1 if vid == ROOT else by_id[vid].tau

    for v in vertices:
        where = f"vertex {v.id}"
        if v.tau < 1:
            errors.append(f"{where}: tau must be positive, got {v.tau}")
        if v.gamma <= 1:
            errors.append(f"{where}: gamma > 1 violated (gamma={v.gamma})")
        if n is not None and v.gamma * v.tau != n:
            errors.append(f"{where}: gamma*tau = n violated ({v.gamma}*{v.tau} != {n})")
        if v.id not in shape_ok or n is None:
            continue
        c = v.parent
        gc = gamma(c)
        where = f"edge {c}->{v.id}"
        if v.alpha <= 1:
            errors.append(f"{where}: alpha > 1 violated (alpha={v.alpha})")
        if v.beta <= 1:
            errors.append(f"{where}: beta > 1 violated (beta={v.beta})")
        if v.alpha >= 1 and gc % v.alpha:
            errors.append(f"{where}: alpha | gamma_{c} violated ({v.alpha} does not divide {gc})")
        if v.beta >= 1 and v.gamma >= 1 and v.gamma % v.beta:
            errors.append(f"{where}: beta | gamma_{v.id} violated ({v.beta} does not divide {v.gamma})")
        if gc * v.beta != v.alpha * v.gamma:
            errors.append(
                f"{where}: gamma_c*beta_d = alpha*gamma_d violated ({gc}*{v.beta} != {v.alpha}*{v.gamma})"
            )

    levels: dict[str, int] = {ROOT: 0}

    def level(vid: str) -> int:
        if vid not in levels:
            levels[vid] = level(by_id[vid].parent) + 1
        return levels[vid]

    pairs: list[PairFamily] = []
    counters: dict[tuple[str, str], int] = {}
    for k, rp in enumerate(raw_pairs):
        where = f"pair #{k}"
        if not isinstance(rp, dict):
            errors.append(f"{where}: must be an object")
            continue
        e, f = rp.get("e"), rp.get("f")
        vals = [_int_field(rp, key, where, errors) for key in ("delta", "rho", "eta")]
        if None in vals:
            continue
        delta, rho, eta = vals
        bad_ref = False
        for name, vid in (("e", e), ("f", f)):
            if not isinstance(vid, str) or not (vid == ROOT or vid in shape_ok):
                errors.append(f"{where}: {name} = {vid!r} is not a valid vertex")
                bad_ref = True
        if bad_ref:
            continue
        idx = counters.get((e, f), 0)
        counters[(e, f)] = idx + 1
        where = f"pair ({e},{f},{idx})"
        if level(e) > level(f):
            errors.append(f"{where}: l(e) <= l(f) violated ({level(e)} > {level(f)})")
        if delta < 1 or rho < 1:
            errors.append(f"{where}: delta and rho must be positive (delta={delta}, rho={rho})")
        else:
            ge, gf = gamma(e), gamma(f)
            if ge % delta:
                errors.append(f"{where}: delta | gamma_{e} violated ({delta} does not divide {ge})")
            if gf % rho:
                errors.append(f"{where}: rho | gamma_{f} violated ({rho} does not divide {gf})")
            if ge * rho != gf * delta:
                errors.append(f"{where}: gamma_e*rho = gamma_f*delta violated ({ge}*{rho} != {gf}*{delta})")
        if e != f and (delta <= 1 or rho <= 1):
            errors.append(f"{where}: delta > 1 and rho > 1 required when e != f (delta={delta}, rho={rho})")
        g = math.gcd(tau(e), tau(f))
        if not 0 <= eta < g:
            errors.append(f"{where}: 0 <= eta < gcd(tau_e, tau_f) = {g} violated (eta={eta})")
        pairs.append(PairFamily(e, f, idx, delta, rho, eta))

    if errors:
        raise TreeValidationError(errors)

    tree = NNTree(n, tuple(vertices), tuple(pairs))  # type: ignore[arg-type]
    for v in tree.vertices:
        # consequences of the constraints; violation here means a validator bug
        assert v.alpha * tree.tau(v.parent) == v.beta * v.tau, v
    for p in tree.pairs:
        assert p.rho * tree.tau(p.f) == p.delta * tree.tau(p.e), p
    return tree


def compute_n1(tree: NNTree) -> int:
    """Least common multiple of all beta_d*tau_d and delta*tau_e (1 if there are none)."""
    out = 1
    for v in tree.vertices:
        out = math.lcm(out, v.beta * v.tau)
    for p in tree.pairs:
        out = math.lcm(out, p.delta * tree.tau(p.e))
    return out


@dataclass(frozen=True)
class Alphabet:
    """Letters of the free group Gamma_T, in a fixed total order."""

    letters: tuple[str, ...]
    vertex_letters: dict[str, tuple[str, ...]] = field(hash=False)
    pair_letters: dict[tuple[str, str, int], tuple[str, ...]] = field(hash=False)

    def __len__(self) -> int:
        return len(self.letters)

    def __contains__(self, name: object) -> bool:
        return name in self._index

    def __iter__(self):
        return iter(self.letters)

    @cached_property
    def _index(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.letters)}

    def position(self, name: str) -> int:
        return self._index[name]

    def check(self, names: Iterable[str]) -> None:
        unknown = sorted(set(names) - set(self._index))
        if unknown:
            raise ValueError(f"letters not in alphabet: {unknown}")


def vertex_letter(vid: str, j: int) -> str:
    return f"{vid}.{j}"


def pair_letter(pair: PairFamily, j: int) -> str:
    return f"t.{pair.e}.{pair.f}.{pair.index}.{j}"


def build_alphabet(tree: NNTree) -> Alphabet:
    letters: list[str] = []
    vl: dict[str, tuple[str, ...]] = {}
    pl: dict[tuple[str, str, int], tuple[str, ...]] = {}
    for v in tree.vertices:
        vl[v.id] = tuple(vertex_letter(v.id, j) for j in range((v.beta - 1) * v.tau))
        letters.extend(vl[v.id])
    for p in tree.pairs:
        pl[p.key] = tuple(pair_letter(p, j) for j in range(p.rho * tree.tau(p.f)))
        letters.extend(pl[p.key])
    return Alphabet(tuple(letters), vl, pl)


def _divisors(m: int) -> list[int]:
    return [k for k in range(1, m + 1) if m % k == 0]


def random_tree(
    rng: random.Random,
    n: int | None = None,
    n_max: int = 12,
    max_vertices: int = 4,
    max_pairs: int = 2,
) -> NNTree:
    """Sample a valid tree: tau among divisors of n, beta among divisors of gamma, pairs solved directly."""
    if n is None:
        n = rng.randint(2, n_max)
    gammas: dict[str, int] = {ROOT: n}
    taus: dict[str, int] = {ROOT: 1}
    levels: dict[str, int] = {ROOT: 0}
    raw_vertices: list[dict] = []
    target = rng.randint(0, max_vertices)
    tries = 0
    while len(raw_vertices) < target and tries < 200:
        tries += 1
        c = rng.choice(sorted(gammas))
        tau = rng.choice([t for t in _divisors(n) if t < n])
        gamma = n // tau
        beta = rng.choice([b for b in _divisors(gamma) if b > 1])
        num = gammas[c] * beta
        if num % gamma:
            continue
        alpha = num // gamma
        if alpha <= 1 or gammas[c] % alpha:
            continue
        vid = "abcdefghijklmnopqrsuvwxyz"[len(raw_vertices) + 1]
        gammas[vid], taus[vid], levels[vid] = gamma, tau, levels[c] + 1
        raw_vertices.append({"id": vid, "parent": c, "tau": tau, "gamma": gamma, "beta": beta, "alpha": alpha})

    raw_pairs: list[dict] = []
    target = rng.randint(0, max_pairs)
    tries = 0
    ids = sorted(gammas)
    while len(raw_pairs) < target and tries < 200:
        tries += 1
        e, f = rng.choice(ids), rng.choice(ids)
        if levels[e] > levels[f]:
            e, f = f, e
        delta = rng.choice(_divisors(gammas[e]))
        num = gammas[f] * delta
        if num % gammas[e]:
            continue
        rho = num // gammas[e]
        if gammas[f] % rho:
            continue
        if e != f and (delta <= 1 or rho <= 1):
            continue
        eta = rng.randrange(math.gcd(taus[e], taus[f]))
        raw_pairs.append({"e": e, "f": f, "delta": delta, "rho": rho, "eta": eta})

    return validate_tree({"n": n, "vertices": raw_vertices, "pairs": raw_pairs})
