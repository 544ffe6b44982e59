"""Noncommutative rational expressions as DAGs, evaluated on tuples of complex matrices.

Leaves are group-algebra elements; inner nodes are sums, ordered products,
scalar multiples and inverses.  Subexpressions may be shared; evaluation and
rewriting are memoized per node so shared structure is visited once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .freegroup import FreeWord
from .grpalg import GroupAlgebraElement
from .scalar import Coefficient

SCHEMA = "nfdiag/1"

TOL_REL = 1e-8
TOL_ABS = 1e-10
RETRY_BUDGET = 8
SINGULAR_COND = 1e12
LETTER_COND = 1e8
ESCALATE_DPS = 50


class RationalExpr:
    __slots__ = ()

    def children(self) -> tuple[RationalExpr, ...]:
        return ()

    def __add__(self, other: RationalExpr) -> RationalExpr:
        return Sum((self, other))

    def __sub__(self, other: RationalExpr) -> RationalExpr:
        return Sum((self, Scale(Coefficient.rational(-1), other)))

    def __mul__(self, other: RationalExpr) -> RationalExpr:
        return Product((self, other))

    def __rmul__(self, c: Coefficient | int) -> RationalExpr:
        return Scale(c if isinstance(c, Coefficient) else Coefficient.rational(c), self)

    def inv(self) -> RationalExpr:
        return Inverse(self)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RationalExpr):
            return NotImplemented
        return _struct_eq(self, other, {})

    __hash__ = object.__hash__

    def __str__(self) -> str:
        return _render(self)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({_render(self)})"


class Leaf(RationalExpr):
    __slots__ = ("value",)

    def __init__(self, value: GroupAlgebraElement):
        self.value = value


class Sum(RationalExpr):
    __slots__ = ("args",)

    def __init__(self, args: Iterable[RationalExpr]):
        self.args = tuple(args)
        if not self.args:
            raise ValueError("empty Sum; use Leaf(0)")

    def children(self) -> tuple[RationalExpr, ...]:
        return self.args


class Product(RationalExpr):
    __slots__ = ("args",)

    def __init__(self, args: Iterable[RationalExpr]):
        self.args = tuple(args)
        if not self.args:
            raise ValueError("empty Product; use Leaf(1)")

    def children(self) -> tuple[RationalExpr, ...]:
        return self.args


class Inverse(RationalExpr):
    __slots__ = ("arg",)

    def __init__(self, arg: RationalExpr):
        self.arg = arg

    def children(self) -> tuple[RationalExpr, ...]:
        return (self.arg,)


class Scale(RationalExpr):
    __slots__ = ("coeff", "arg")

    def __init__(self, coeff: Coefficient, arg: RationalExpr):
        self.coeff = coeff
        self.arg = arg

    def children(self) -> tuple[RationalExpr, ...]:
        return (self.arg,)


def leaf(x: GroupAlgebraElement | FreeWord | str) -> Leaf:
    if isinstance(x, str):
        x = GroupAlgebraElement.letter(x)
    elif isinstance(x, FreeWord):
        x = GroupAlgebraElement.word(x)
    return Leaf(x)


def const(c: Coefficient | int) -> Leaf:
    return Leaf(GroupAlgebraElement.scalar(c))


def linear_combination(terms: Sequence[tuple[Coefficient, RationalExpr]]) -> RationalExpr:
    parts = [e if c.is_one() else Scale(c, e) for c, e in terms if not c.is_zero()]
    if not parts:
        return const(0)
    return parts[0] if len(parts) == 1 else Sum(parts)


def topo_order(root: RationalExpr) -> list[RationalExpr]:
    """Post-order listing of the distinct nodes below ``root`` (children first)."""
    out: list[RationalExpr] = []
    seen: set[int] = set()
    stack: list[tuple[RationalExpr, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            out.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for ch in reversed(node.children()):
            if id(ch) not in seen:
                stack.append((ch, False))
    return out


def letters_of(*exprs: RationalExpr) -> set[str]:
    out: set[str] = set()
    for e in exprs:
        for node in topo_order(e):
            if isinstance(node, Leaf):
                out |= node.value.letters()
    return out


def symbols_of(*exprs: RationalExpr) -> set[str]:
    out: set[str] = set()
    for e in exprs:
        for node in topo_order(e):
            if isinstance(node, Leaf):
                out |= node.value.symbols()
            elif isinstance(node, Scale):
                out |= node.coeff.symbols()
    return out


def _struct_eq(a: RationalExpr, b: RationalExpr, memo: dict) -> bool:
    if a is b:
        return True
    key = (id(a), id(b))
    if key in memo:
        return memo[key]
    if type(a) is not type(b):
        res = False
    elif isinstance(a, Leaf):
        res = a.value == b.value
    elif isinstance(a, Scale):
        res = a.coeff == b.coeff and _struct_eq(a.arg, b.arg, memo)
    else:
        ca, cb = a.children(), b.children()
        res = len(ca) == len(cb) and all(_struct_eq(x, y, memo) for x, y in zip(ca, cb))
    memo[key] = res
    return res


def _render(root: RationalExpr) -> str:
    memo: dict[int, str] = {}
    for node in topo_order(root):
        if isinstance(node, Leaf):
            s = str(node.value)
            s = f"({s})" if len(node.value) > 1 else s
        elif isinstance(node, Sum):
            s = "(" + " + ".join(memo[id(a)] for a in node.args) + ")"
        elif isinstance(node, Product):
            s = " . ".join(memo[id(a)] for a in node.args)
        elif isinstance(node, Inverse):
            s = f"({memo[id(node.arg)]})^-1"
        else:
            s = f"[{node.coeff}] * {memo[id(node.arg)]}"
        memo[id(node)] = s
    return memo[id(root)]


# -- rewriting --------------------------------------------------------------


def map_leaves(root: RationalExpr, fn: Callable[[GroupAlgebraElement], GroupAlgebraElement | RationalExpr],
               memo: dict[int, RationalExpr] | None = None) -> RationalExpr:
    """Rebuild ``root`` with every leaf value replaced by ``fn(value)``, preserving sharing."""
    memo = {} if memo is None else memo
    for node in topo_order(root):
        if id(node) in memo:
            continue
        if isinstance(node, Leaf):
            new = fn(node.value)
            memo[id(node)] = new if isinstance(new, RationalExpr) else Leaf(new)
        elif isinstance(node, Sum):
            memo[id(node)] = Sum(memo[id(a)] for a in node.args)
        elif isinstance(node, Product):
            memo[id(node)] = Product(memo[id(a)] for a in node.args)
        elif isinstance(node, Inverse):
            memo[id(node)] = Inverse(memo[id(node.arg)])
        else:
            memo[id(node)] = Scale(node.coeff, memo[id(node.arg)])
    return memo[id(root)]


class Substitution:
    """Replace letters by rational expressions (shared across many calls).

    ``known`` maps whole words to expressions that equal them; a word is
    rewritten greedily through the longest known subwords (or their inverses)
    before falling back to letter-by-letter products.  Fewer long products
    means less rounding error when the result is evaluated.
    """

    def __init__(self, mapping: Mapping[str, RationalExpr], known: Mapping[FreeWord, RationalExpr] | None = None):
        self.mapping = dict(mapping)
        self.known: dict[FreeWord, RationalExpr] = {}
        self._longest = 0
        self._inverses: dict[str, RationalExpr] = {}
        self._known_inv: dict[FreeWord, RationalExpr] = {}
        self._memo: dict[int, RationalExpr] = {}
        self._keep: list[RationalExpr] = []  # keeps memo ids alive
        for w, e in (known or {}).items():
            self.add_known(w, e)

    def add_known(self, w: FreeWord, expr: RationalExpr) -> None:
        if len(w) > 1 and w not in self.known:
            self.known[w] = expr
            self._longest = max(self._longest, len(w))

    def letter(self, name: str, exp: int) -> RationalExpr:
        if exp == 1:
            return self.mapping[name]
        if name not in self._inverses:
            self._inverses[name] = Inverse(self.mapping[name])
        return self._inverses[name]

    def _lookup(self, w: FreeWord) -> RationalExpr | None:
        if w in self.known:
            return self.known[w]
        wi = w.inverse()
        if wi in self.known:
            if wi not in self._known_inv:
                self._known_inv[wi] = Inverse(self.known[wi])
            return self._known_inv[wi]
        return None

    def word(self, w: FreeWord) -> RationalExpr:
        if w.is_identity():
            return const(1)
        syl = w.letters
        parts: list[RationalExpr] = []
        p = 0
        while p < len(syl):
            hit = None
            for q in range(min(len(syl), p + self._longest), p + 1, -1):
                hit = self._lookup(FreeWord._trusted(syl[p:q]))
                if hit is not None:
                    p = q
                    break
            if hit is None:
                hit = self.letter(*syl[p])
                p += 1
            parts.append(hit)
        return parts[0] if len(parts) == 1 else Product(parts)

    def element(self, g: GroupAlgebraElement) -> RationalExpr:
        return linear_combination([(c, self.word(w)) for w, c in g.terms])

    def __call__(self, root: RationalExpr) -> RationalExpr:
        self._keep.append(root)
        return map_leaves(root, self.element, self._memo)


# -- evaluation -------------------------------------------------------------


class SingularAtNode(ArithmeticError):
    def __init__(self, node_index: int, cond: float, what: str = "inverse"):
        self.node_index = node_index
        self.cond = cond
        super().__init__(f"singular {what} at node {node_index} (cond ~ {cond:.3g})")


class Float64:
    """Matrix arithmetic in numpy complex128."""

    name = "float64"

    def convert(self, m: Any) -> np.ndarray:
        return m if isinstance(m, np.ndarray) else np.array(m.tolist(), dtype=complex)

    def eye(self, n: int) -> np.ndarray:
        return np.eye(n, dtype=complex)

    def scalar(self, c: Coefficient, values: Mapping[str, complex]) -> complex:
        return c.instantiate(values)

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return a @ b

    def inv(self, m: np.ndarray) -> np.ndarray:
        cond = np.linalg.cond(m)
        if not np.isfinite(cond) or cond > SINGULAR_COND:
            raise SingularAtNode(-1, float(cond))
        return np.linalg.solve(m, np.eye(m.shape[0]))

    def norm(self, m: np.ndarray) -> float:
        return float(np.linalg.norm(m))


class Extended:
    """Matrix arithmetic in mpmath at ``dps`` decimal digits.

    Used to re-evaluate a sample whose float64 residual misses tolerance, so
    rounding error can be told apart from a genuine mismatch.
    """

    def __init__(self, dps: int = 50):
        import mpmath

        self.ctx = mpmath.MPContext()
        self.ctx.dps = dps
        self.name = f"mp{dps}"

    def convert(self, m: Any) -> Any:
        if isinstance(m, np.ndarray):
            return self.ctx.matrix([[self.ctx.mpc(complex(z)) for z in row] for row in m])
        return m

    def eye(self, n: int) -> Any:
        return self.ctx.eye(n)

    def scalar(self, c: Coefficient, values: Mapping[str, complex]) -> Any:
        return c.instantiate_mp(values, self.ctx)

    def matmul(self, a: Any, b: Any) -> Any:
        return a * b

    def inv(self, m: Any) -> Any:
        try:
            out = self.ctx.inverse(m)
        except ZeroDivisionError:
            raise SingularAtNode(-1, float("inf")) from None
        cond = float(self.ctx.mnorm(m, 1) * self.ctx.mnorm(out, 1))
        if cond > SINGULAR_COND:
            raise SingularAtNode(-1, cond)
        return out

    def norm(self, m: Any) -> float:
        return float(self.ctx.mnorm(m, "f"))


FLOAT64 = Float64()


@dataclass
class MatrixPoint:
    """Assignment of square complex matrices (all of one size) to letters."""

    size: int
    matrices: dict[str, Any]

    def __post_init__(self):
        for name, m in self.matrices.items():
            shape = m.shape if isinstance(m, np.ndarray) else (m.rows, m.cols)
            if shape != (self.size, self.size):
                raise ValueError(f"matrix for {name} has shape {shape}, expected {(self.size, self.size)}")


def random_matrix(rng: np.random.Generator, k: int) -> np.ndarray:
    """Entries i.i.d. uniform on the complex unit disk."""
    r = np.sqrt(rng.random((k, k)))
    theta = rng.random((k, k)) * 2 * np.pi
    return r * np.exp(1j * theta)


def random_point(letters: Iterable[str], size: int, rng: np.random.Generator) -> MatrixPoint:
    mats = {}
    for name in sorted(letters):
        for _ in range(100):
            m = random_matrix(rng, size)
            if np.linalg.cond(m) < LETTER_COND:
                break
        mats[name] = m
    return MatrixPoint(size, mats)


class Evaluator:
    """Evaluates expressions at one matrix point, sharing work between calls."""

    def __init__(self, point: MatrixPoint, values: Mapping[str, complex] | None = None, arith=FLOAT64):
        self.point = point
        self.values = dict(values or {})
        self.arith = arith
        self._memo: dict[int, Any] = {}
        self._keep: list[RationalExpr] = []
        self._words: dict[FreeWord, Any] = {}
        self._letters: dict[tuple[str, int], Any] = {}
        self._eye = arith.eye(point.size)

    def scalar(self, c: Coefficient) -> Any:
        return self.arith.scalar(c, self.values)

    def letter(self, name: str, exp: int) -> Any:
        key = (name, exp)
        if key not in self._letters:
            m = self.arith.convert(self.point.matrices[name])
            if exp == -1:
                try:
                    m = self.arith.inv(m)
                except SingularAtNode as exc:
                    raise SingularAtNode(-1, exc.cond, what=f"letter {name}") from None
            self._letters[key] = m
        return self._letters[key]

    def word(self, w: FreeWord) -> Any:
        if w not in self._words:
            m = self._eye
            for s, e in w:
                m = self.arith.matmul(m, self.letter(s, e))
            self._words[w] = m
        return self._words[w]

    def element(self, g: GroupAlgebraElement) -> Any:
        out = self._eye * 0
        for w, c in g.terms:
            out = out + self.scalar(c) * self.word(w)
        return out

    def __call__(self, root: RationalExpr) -> Any:
        memo = self._memo
        self._keep.append(root)
        for idx, node in enumerate(topo_order(root)):
            if id(node) in memo:
                continue
            if isinstance(node, Leaf):
                val = self.element(node.value)
            elif isinstance(node, Sum):
                val = memo[id(node.args[0])]
                for a in node.args[1:]:
                    val = val + memo[id(a)]
            elif isinstance(node, Product):
                val = memo[id(node.args[0])]
                for a in node.args[1:]:
                    val = self.arith.matmul(val, memo[id(a)])
            elif isinstance(node, Inverse):
                try:
                    val = self.arith.inv(memo[id(node.arg)])
                except SingularAtNode as exc:
                    raise SingularAtNode(idx, exc.cond) from None
            else:
                val = self.scalar(node.coeff) * memo[id(node.arg)]
            memo[id(node)] = val
        return memo[id(root)]


def evaluate(expr: RationalExpr, pt: MatrixPoint, values: Mapping[str, complex] | None = None,
             arith=FLOAT64) -> Any:
    return Evaluator(pt, values, arith)(expr)


# -- randomized identity testing --------------------------------------------


@dataclass
class Verdict:
    status: str  # "equal_whp" | "distinct" | "degenerate"
    max_residual: float
    max_relative: float
    trials: int
    sizes: tuple[int, ...]
    seed: int
    samples: int = 0
    witness: dict | None = None
    degenerate_sizes: tuple[int, ...] = ()
    escalated: int = 0

    @property
    def ok(self) -> bool:
        return self.status == "equal_whp"

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "max_residual": float(f"{self.max_residual:.6e}"),
            "max_relative": float(f"{self.max_relative:.6e}"),
            "trials": self.trials,
            "sizes": list(self.sizes),
            "seed": self.seed,
            "samples": self.samples,
            "escalated": self.escalated,
            "witness": self.witness,
            "degenerate_sizes": list(self.degenerate_sizes),
        }


def within_tolerance(a: Any, b: Any, tol_rel: float = TOL_REL, tol_abs: float = TOL_ABS,
                     arith=FLOAT64) -> tuple[bool, float, float]:
    res = arith.norm(a - b)
    scale = arith.norm(a) + arith.norm(b)
    rel = res / scale if scale else res
    return res <= tol_abs + tol_rel * scale, res, rel


PairsFn = Callable[[MatrixPoint, Any], Iterator[tuple[Any, Any, Any]]]


def compare_many(
    pairs: PairsFn,
    letters: Iterable[str],
    trials: int = 5,
    sizes: Sequence[int] = (2, 3, 4),
    seed: int = 0,
    tol_rel: float = TOL_REL,
    tol_abs: float = TOL_ABS,
    retry: int = RETRY_BUDGET,
    escalate_dps: int | None = ESCALATE_DPS,
) -> dict[Any, Verdict]:
    """Sample random points and compare every ``(label, lhs, rhs)`` that ``pairs(pt, arith)`` yields.

    Each sample draws from its own stream seeded by ``(seed, size, sample, attempt)``.
    A point where something is singular is redrawn up to ``retry`` times; a size
    that exhausts the budget is abandoned and the next size tried.  When a label
    misses tolerance in float64 the same point is re-evaluated at
    ``escalate_dps`` digits and that residual is the one judged.  Every label
    gets its own verdict and sampling never stops early.
    """
    letters = sorted(set(letters))
    sizes = tuple(sizes)
    stats: dict[Any, list] = {}  # label -> [max_res, max_rel, witness, escalated]
    done = 0
    degenerate: list[int] = []
    extended = None
    for size in sizes:
        for t in range(trials):
            for attempt in range(retry):
                rng = np.random.default_rng([seed, size, t, attempt])
                pt = random_point(letters, size, rng)
                try:
                    results = list(pairs(pt, FLOAT64))
                except SingularAtNode:
                    continue
                break
            else:
                degenerate.append(size)
                break
            done += 1
            judged = [(label, *within_tolerance(a, b, tol_rel, tol_abs), False) for label, a, b in results]
            if escalate_dps and not all(ok for _, ok, _, _, _ in judged):
                extended = extended or Extended(escalate_dps)
                try:
                    precise = {label: (a, b) for label, a, b in pairs(pt, extended)}
                except SingularAtNode:
                    precise = {}
                for n, (label, ok, res, rel, _) in enumerate(judged):
                    if not ok and label in precise:
                        a, b = precise[label]
                        judged[n] = (label, *within_tolerance(a, b, tol_rel, tol_abs, extended), True)
            for label, ok, res, rel, esc in judged:
                st = stats.setdefault(label, [0.0, 0.0, None, 0])
                st[0], st[1] = max(st[0], res), max(st[1], rel)
                st[3] += esc
                if not ok and st[2] is None:
                    st[2] = {"size": size, "sample": t, "attempt": attempt, "residual": float(f"{res:.6e}"),
                             "precision": extended.name if esc else FLOAT64.name}
    out = {}
    for label, (res, rel, witness, esc) in stats.items():
        status = "distinct" if witness else ("equal_whp" if done else "degenerate")
        out[label] = Verdict(status, res, rel, trials, sizes, seed, done, witness, tuple(degenerate), esc)
    return out


def compare_numerically(
    pairs: PairsFn,
    letters: Iterable[str],
    trials: int = 5,
    sizes: Sequence[int] = (2, 3, 4),
    seed: int = 0,
    tol_rel: float = TOL_REL,
    tol_abs: float = TOL_ABS,
    retry: int = RETRY_BUDGET,
    escalate_dps: int | None = ESCALATE_DPS,
) -> Verdict:
    """One verdict over all labels: distinct if any label is, with that label as witness."""
    sizes = tuple(sizes)
    verdicts = compare_many(pairs, letters, trials, sizes, seed, tol_rel, tol_abs, retry, escalate_dps)
    if not verdicts:
        return Verdict("degenerate", 0.0, 0.0, trials, sizes, seed)
    vs = list(verdicts.items())
    res = max(v.max_residual for _, v in vs)
    rel = max(v.max_relative for _, v in vs)
    first = vs[0][1]
    esc = sum(v.escalated for _, v in vs)
    for label, v in vs:
        if v.status == "distinct":
            return Verdict("distinct", res, rel, trials, sizes, seed, v.samples, dict(v.witness, label=label),
                           v.degenerate_sizes, esc)
    return Verdict(first.status, res, rel, trials, sizes, seed, first.samples, None, first.degenerate_sizes, esc)


def probable_equal(
    a: RationalExpr,
    b: RationalExpr,
    trials: int = 5,
    sizes: Sequence[int] = (2, 3, 4),
    seed: int = 0,
    values: Mapping[str, complex] | None = None,
    tol_rel: float = TOL_REL,
    tol_abs: float = TOL_ABS,
) -> Verdict:
    """Randomized equality test of two rational expressions on matrix tuples."""
    if a is b or a == b:
        return Verdict("equal_whp", 0.0, 0.0, trials, tuple(sizes), seed)

    def pairs(pt: MatrixPoint, arith):
        ev = Evaluator(pt, values, arith)
        yield "a=b", ev(a), ev(b)

    return compare_numerically(pairs, letters_of(a, b), trials, sizes, seed, tol_rel, tol_abs)


# -- serialization ----------------------------------------------------------


def to_json(root: RationalExpr) -> dict:
    order = topo_order(root)
    index = {id(n): i for i, n in enumerate(order)}
    nodes = []
    for i, node in enumerate(order):
        if isinstance(node, Leaf):
            nodes.append({"id": i, "op": "leaf", "value": node.value.to_json()})
        elif isinstance(node, Sum):
            nodes.append({"id": i, "op": "sum", "args": [index[id(a)] for a in node.args]})
        elif isinstance(node, Product):
            nodes.append({"id": i, "op": "product", "args": [index[id(a)] for a in node.args]})
        elif isinstance(node, Inverse):
            nodes.append({"id": i, "op": "inverse", "arg": index[id(node.arg)]})
        else:
            nodes.append({"id": i, "op": "scale", "coeff": node.coeff.to_json(), "arg": index[id(node.arg)]})
    return {"schema": SCHEMA, "nodes": nodes, "root": index[id(root)]}


def from_json(obj: dict) -> RationalExpr:
    built: dict[int, RationalExpr] = {}
    for nd in obj["nodes"]:
        op = nd["op"]
        if op == "leaf":
            node: RationalExpr = Leaf(GroupAlgebraElement.from_json(nd["value"]))
        elif op == "sum":
            node = Sum(built[i] for i in nd["args"])
        elif op == "product":
            node = Product(built[i] for i in nd["args"])
        elif op == "inverse":
            node = Inverse(built[nd["arg"]])
        elif op == "scale":
            node = Scale(Coefficient.from_json(nd["coeff"]), built[nd["arg"]])
        else:
            raise ValueError(f"unknown node op {op!r}")
        built[int(nd["id"])] = node
    return built[int(obj["root"])]
