"""Synthesis of a free generating set on which a twisted tree automorphism acts diagonally.

Per non-root vertex d the elements

    X(i,j) = sum_k w^{jk} x(i,k) M_d(i,k),     w a primitive beta_d-th root of 1,

are permuted cyclically by phi~ (up to the scalar xi_d and the word D_0^{-1}),
so Y(i,j) = X(i,0)^{-1} X(i,j) cycle with wrap scalar w^{-j}.  Per pair family
the products L(j) T_j R(j) cycle with wrap scalar mu*nu.  A discrete Fourier
transform over each cycle yields eigenvectors; back-substitution expresses
every original letter through the new generators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .automorphism import TwistedAutomorphism
from .freegroup import FreeWord
from .grpalg import GroupAlgebraElement
from .nntree import ROOT, PairFamily
from .ratexpr import (
    Inverse,
    Leaf,
    Product,
    RationalExpr,
    Scale,
    Substitution,
    Sum,
    const,
    leaf,
    linear_combination,
)
from .scalar import Coefficient

FAULTS = ("x", "xi", "wrap", "vandermonde")

GA = GroupAlgebraElement


class PostCheckFailed(AssertionError):
    def __init__(self, failures: list[CheckResult]):
        self.failures = failures
        super().__init__("; ".join(f"{c.name}: {c.detail}" for c in failures))


@dataclass
class CheckResult:
    name: str
    level: str  # "exact" | "numeric"
    passed: bool
    detail: str = ""
    data: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def to_json(self) -> dict:
        out = {"name": self.name, "level": self.level, "status": self.status}
        if self.detail:
            out["detail"] = self.detail
        out.update(self.data)
        return out


def _exact(name: str, lhs, rhs, what: str) -> CheckResult:
    ok = lhs == rhs
    return CheckResult(name, "exact", ok, "" if ok else f"{what} does not hold: lhs = {lhs}; rhs = {rhs}")


def conductor(aut: TwistedAutomorphism) -> int:
    """One cyclotomic order holding every root of unity the construction creates."""
    tree = aut.tree
    out = 2
    for v in tree.vertices:
        lam, _ = aut.lam(v.id)
        out = math.lcm(out, v.beta * v.tau, lam)
    for p in tree.pairs:
        u, v = aut.u_v(p)
        out = math.lcm(out, p.rho * tree.tau(p.f), u, v)
    return out


# -- vertices -------------------------------------------------------------------


@dataclass
class VertexDiagonalisers:
    vertex: str
    beta: int
    tau: int
    lam: int
    u: int
    omega: Coefficient
    xi: Coefficient
    xi_power: Coefficient  # the product whose lam-th root is xi
    x: list[list[Coefficient]]  # x[i][k]
    X: dict[tuple[int, int], GA]
    Y: dict[tuple[int, int], RationalExpr]
    checks: list[CheckResult] = field(default_factory=list)


def synth_vertex(aut: TwistedAutomorphism, d: str, field_order: int | None = None,
                 faults: Iterable[str] = (), strict: bool = True) -> VertexDiagonalisers:
    tree = aut.tree
    v = tree.vertex(d)
    beta, tau = v.beta, v.tau
    lam, u = aut.lam(d)
    faults = set(faults)
    N = field_order or conductor(aut)
    omega = Coefficient.root_of_unity(1, beta, N)

    # xi^lam = prod_{l=1}^{tau} prod_{t<lam} m(l,t)
    step = [Coefficient.one()]  # step[t] = prod_{l=1}^{tau} m(l,t)
    for t in range(lam):
        acc = Coefficient.one()
        for l in range(1, tau + 1):
            acc = acc * aut.m(d, l, t)
        step.append(acc) if t else step.__setitem__(0, acc)
    power = Coefficient.one()
    for t in range(lam):
        power = power * step[t]
    xi = power.nth_root(lam)
    if "xi" in faults:
        xi = xi * 2

    xi_inv = xi.inv()
    x0 = [Coefficient.one()]
    for k in range(1, lam):
        x0.append(x0[-1] * xi_inv * step[k - 1])
    if "x" in faults and lam > 1:
        x0[1] = x0[1] * 2
    x: list[list[Coefficient]] = []
    for i in range(tau):
        row = []
        for k in range(lam):
            c = x0[k]
            for l in range(1, i + 1):
                c = c * aut.m(d, l, k)
            row.append(c)
        x.append(row)

    X: dict[tuple[int, int], GA] = {}
    for i in range(tau):
        for j in range(beta):
            X[(i, j)] = GA((aut.M(d, i, k), omega ** ((j * k) % beta) * x[i][k]) for k in range(lam))
    Y: dict[tuple[int, int], RationalExpr] = {}
    for i in range(tau):
        denom = Inverse(Leaf(X[(i, 0)]))
        for j in range(1, beta):
            Y[(i, j)] = Product((denom, Leaf(X[(i, j)])))

    vd = VertexDiagonalisers(d, beta, tau, lam, u, omega, xi, power, x, X, Y)
    vd.checks = check_vertex(aut, vd)
    if strict:
        failed = [c for c in vd.checks if not c.passed]
        if failed:
            raise PostCheckFailed(failed)
    return vd


def vandermonde_bracket(aut: TwistedAutomorphism, vd: VertexDiagonalisers, i: int, k: int) -> GA:
    """sum_s x(i, s*beta + k) M_c(k*tau + i, s*alpha), a polynomial in the parent's letters."""
    v = aut.tree.vertex(vd.vertex)
    return GA((aut.M(v.parent, k * vd.tau + i, s * v.alpha), vd.x[i][s * vd.beta + k]) for s in range(vd.u))


def check_vertex(aut: TwistedAutomorphism, vd: VertexDiagonalisers) -> list[CheckResult]:
    d, beta, tau, lam = vd.vertex, vd.beta, vd.tau, vd.lam
    v = aut.tree.vertex(d)
    pre = f"vertex.{d}"
    out: list[CheckResult] = []

    for i in range(tau):
        words = [aut.M(d, i, k) for k in range(lam)]
        ok = len(set(words)) == lam and all(len(vd.X[(i, j)]) == lam for j in range(beta))
        out.append(CheckResult(f"{pre}.distinct[i={i}]", "exact", ok,
                               "" if ok else "M_d(i,k), k < lambda, are not pairwise distinct"))
        parent_words = [aut.M(v.parent, i, s * v.alpha) for s in range(vd.u)]
        ok = len(set(parent_words)) == vd.u
        out.append(CheckResult(f"{pre}.parent_distinct[i={i}]", "exact", ok,
                               "" if ok else "M_c(i, s*alpha), s < u_d, are not pairwise distinct"))

    out.append(_exact(f"{pre}.xi_power", vd.xi ** lam, vd.xi_power, "xi^lambda = prod m(l,t)"))
    out.append(CheckResult(f"{pre}.x00", "exact", vd.x[0][0].is_one(), "" if vd.x[0][0].is_one() else "x(0,0) != 1"))

    d0_inv = FreeWord.letter(aut.alphabet.vertex_letters[d][0], -1)
    for j in range(beta):
        for i in range(tau - 1):
            out.append(_exact(f"{pre}.shift[i={i},j={j}]", aut.apply(vd.X[(i, j)]), vd.X[(i + 1, j)],
                              f"phi~(X({i},{j})) = X({i + 1},{j})"))
        lhs = aut.apply(vd.X[(tau - 1, j)])
        rhs = (d0_inv * vd.X[(0, j)]).scale(vd.omega ** ((-j) % beta) * vd.xi)
        out.append(_exact(f"{pre}.wrap[j={j}]", lhs, rhs, f"phi~(X({tau - 1},{j})) = w^-{j} xi D_0^-1 X(0,{j})"))

    for i in range(tau):
        total = GA()
        for j in range(1, beta):
            total = total + vd.X[(i, j)]
        W = vandermonde_bracket(aut, vd, i, 0)
        out.append(_exact(f"{pre}.sum_identity[i={i}]", total, W.scale(beta) - vd.X[(i, 0)],
                          "sum_j X(i,j) = beta * W(i) - X(i,0)"))
        for j in range(beta):
            recon = GA()
            for k in range(beta):
                recon = recon + (GA.word(aut.M(d, i, k)) * vandermonde_bracket(aut, vd, i, k)).scale(
                    vd.omega ** ((j * k) % beta))
            out.append(_exact(f"{pre}.vandermonde[i={i},j={j}]", recon, vd.X[(i, j)],
                              "X(i,j) = sum_k w^{jk} M_d(i,k) B_k(i)"))
    return out


# -- pair families ------------------------------------------------------------------


@dataclass
class PairDiagonalisers:
    pair: PairFamily
    length: int  # rho * tau_f
    u: int
    v: int
    mu: Coefficient
    nu: Coefficient
    mu_power: Coefficient
    nu_power: Coefficient
    ell: list[list[Coefficient]]
    r: list[list[Coefficient]]
    L: list[GA]
    R: list[GA]
    T: list[GA]  # L(j) T_j R(j)
    checks: list[CheckResult] = field(default_factory=list)


def synth_pair(aut: TwistedAutomorphism, pair: PairFamily, faults: Iterable[str] = (),
               strict: bool = True) -> PairDiagonalisers:
    tree = aut.tree
    e, f, rho, delta, eta = pair.e, pair.f, pair.rho, pair.delta, pair.eta
    length = rho * tree.tau(f)
    u, v = aut.u_v(pair)

    def block(vid: str, shift: int, width: int) -> list[Coefficient]:
        # block(t) = prod_{l=1}^{length} m_vid(l + shift, t * width)
        out = []
        for t in range(max(u, v)):
            acc = Coefficient.one()
            for l in range(1, length + 1):
                acc = acc * aut.m(vid, l + shift, t * width)
            out.append(acc)
        return out

    fblock = block(f, 0, rho)
    eblock = block(e, eta, delta)

    mu_power = Coefficient.one()
    for t in range(u):
        mu_power = mu_power * fblock[t].inv()
    mu = mu_power.nth_root(u)
    nu_power = Coefficient.one()
    for t in range(v):
        nu_power = nu_power * eblock[t]
    nu = nu_power.nth_root(v)

    ell0 = [Coefficient.one()]
    for k in range(1, u):
        ell0.append(ell0[-1] * mu.inv() * fblock[k - 1].inv())
    r0 = [Coefficient.one()]
    for k in range(1, v):
        r0.append(r0[-1] * nu.inv() * eblock[k - 1])

    ell, r, L, R, T = [], [], [], [], []
    letters = aut.alphabet.pair_letters[pair.key]
    for j in range(length):
        lrow = []
        for k in range(u):
            c = ell0[k]
            for l in range(1, j + 1):
                c = c * aut.m(f, l, k * rho).inv()
            lrow.append(c)
        rrow = []
        for k in range(v):
            c = r0[k]
            for l in range(1, j + 1):
                c = c * aut.m(e, l + eta, k * delta)
            rrow.append(c)
        ell.append(lrow)
        r.append(rrow)
        L.append(GA((aut.M(f, j, k * rho).inverse(), lrow[k]) for k in range(u)))
        R.append(GA((aut.M(e, j + eta, k * delta), rrow[k]) for k in range(v)))
        T.append(L[j] * GA.letter(letters[j]) * R[j])

    pd = PairDiagonalisers(pair, length, u, v, mu, nu, mu_power, nu_power, ell, r, L, R, T)
    pd.checks = check_pair(aut, pd)
    if strict:
        failed = [c for c in pd.checks if not c.passed]
        if failed:
            raise PostCheckFailed(failed)
    return pd


def check_pair(aut: TwistedAutomorphism, pd: PairDiagonalisers) -> list[CheckResult]:
    p = pd.pair
    pre = f"pair.{p.label}"
    N = pd.length
    out: list[CheckResult] = []
    for j in range(N):
        fw = [aut.M(p.f, j, k * p.rho) for k in range(pd.u)]
        ew = [aut.M(p.e, j + p.eta, k * p.delta) for k in range(pd.v)]
        ok = len(set(fw)) == pd.u and len(set(ew)) == pd.v
        out.append(CheckResult(f"{pre}.distinct[j={j}]", "exact", ok,
                               "" if ok else "words of L or R are not pairwise distinct"))
    out.append(_exact(f"{pre}.mu_power", pd.mu ** pd.u, pd.mu_power, "mu^u = prod m_f^-1"))
    out.append(_exact(f"{pre}.nu_power", pd.nu ** pd.v, pd.nu_power, "nu^v = prod m_e"))
    for j in range(N - 1):
        out.append(_exact(f"{pre}.L_shift[j={j}]", aut.apply(pd.L[j]), pd.L[j + 1], f"phi~(L({j})) = L({j + 1})"))
        out.append(_exact(f"{pre}.R_shift[j={j}]", aut.apply(pd.R[j]), pd.R[j + 1], f"phi~(R({j})) = R({j + 1})"))
    out.append(_exact(f"{pre}.L_wrap", aut.apply(pd.L[N - 1]), (pd.L[0] * aut.M(p.f, 0, p.rho)).scale(pd.mu),
                      "phi~(L(N-1)) = mu L(0) M_f(0,rho)"))
    out.append(_exact(f"{pre}.R_wrap", aut.apply(pd.R[N - 1]),
                      (aut.M(p.e, p.eta, p.delta).inverse() * pd.R[0]).scale(pd.nu),
                      "phi~(R(N-1)) = nu M_e(eta,delta)^-1 R(0)"))
    letters = aut.alphabet.pair_letters[p.key]
    for j in range(N):
        t = aut.twist_map.get(letters[j], Coefficient.one())
        if j < N - 1:
            rhs = pd.T[j + 1].scale(t)
        else:
            rhs = pd.T[0].scale(t * pd.mu * pd.nu)
        out.append(_exact(f"{pre}.cycle[j={j}]", aut.apply(pd.T[j]), rhs,
                          "phi~(T~(j)) = t_j T~(j+1), with mu*nu at the wrap"))
    return out


# -- Fourier diagonalisation ------------------------------------------------------------


@dataclass
class Block:
    """A phi~-cycle e_0 -> s_0 e_1 -> ... with phi~(e_{L-1}) = s_{L-1} e_0."""

    label: str
    kind: str
    elements: list[RationalExpr]
    steps: list[Coefficient]
    exact: list[GA] | None = None
    provenance: dict = field(default_factory=dict)

    @property
    def wrap(self) -> Coefficient:
        out = Coefficient.one()
        for s in self.steps:
            out = out * s
        return out


@dataclass
class Generator:
    name: str
    expr: RationalExpr
    eigenvalue: Coefficient
    block: str
    provenance: dict
    exact: GA | None = None


@dataclass
class DiagonalBasis:
    generators: list[Generator]
    inverse: dict[str, RationalExpr]

    def names(self) -> list[str]:
        return [g.name for g in self.generators]


def fourier_diagonalize(blocks: list[Block], field_order: int = 1,
                        faults: Iterable[str] = ()) -> tuple[list[Generator], dict[str, list[tuple[Coefficient, str]]]]:
    """Eigenvectors g_m = sum_p theta_m^{-p} (s_0...s_{p-1}) e_p with theta_m^L = wrap.

    Also returns, per block element, its expansion in the generators
    (the inverse transform) as ``label[p] -> [(coeff, generator name)]``.
    """
    faults = set(faults)
    gens: list[Generator] = []
    inverse: dict[str, list[tuple[Coefficient, str]]] = {}
    for b in blocks:
        L = len(b.elements)
        prefix = [Coefficient.one()]
        for s in b.steps[:-1]:
            prefix.append(prefix[-1] * s)
        sigma = b.wrap
        if "wrap" in faults:
            sigma = sigma * 2
        theta0 = sigma.nth_root(L)
        thetas = [theta0 * Coefficient.root_of_unity(m, L, field_order) for m in range(L)]
        names = [f"g.{b.label}.{m}" for m in range(L)]
        for m, theta in enumerate(thetas):
            th_inv = theta.inv()
            coeffs = [th_inv ** p * prefix[p] for p in range(L)]
            expr = linear_combination(list(zip(coeffs, b.elements)))
            exact = None
            if b.exact is not None:
                exact = GA()
                for c, el in zip(coeffs, b.exact):
                    exact = exact + el.scale(c)
                expr = Leaf(exact)
            gens.append(Generator(names[m], expr, theta, b.label, dict(b.provenance, m=m), exact))
        inv_L = Coefficient.rational(Fraction(1, L))
        for p in range(L):
            pre_inv = prefix[p].inv()
            inverse[f"{b.label}[{p}]"] = [(inv_L * thetas[m] ** p * pre_inv, names[m]) for m in range(L)]
    return gens, inverse


# -- back substitution ------------------------------------------------------------------


def _poly_expr(sub: Substitution, g: GA) -> RationalExpr:
    return sub.element(g)


def _divide_right(num: RationalExpr, den: GA, sub: Substitution) -> RationalExpr:
    """num * den^-1, scaling instead of inverting when den is a scalar."""
    if len(den) == 1 and den.terms[0][0].is_identity():
        return Scale(den.terms[0][1].inv(), num)
    return Product((num, Inverse(sub.element(den))))


def back_substitute(aut: TwistedAutomorphism, vertices: dict[str, VertexDiagonalisers],
                    pairs: list[PairDiagonalisers],
                    element_exprs: dict[str, RationalExpr],
                    faults: Iterable[str] = ()) -> dict[str, RationalExpr]:
    """Express each original letter through the new generators, level by level.

    ``element_exprs`` maps block element labels (``<vertex>.<j>[i]`` for Y(i,j),
    ``t.<e>.<f>.<i>[j]`` for the pair products) to expressions in the generators.
    """
    faults = set(faults)
    tree = aut.tree
    sub = Substitution({})
    for v in tree.level_order:
        vd = vertices[v.id]
        beta, tau = vd.beta, vd.tau
        letters = aut.alphabet.vertex_letters[v.id]
        for i in range(tau):
            ys = [element_exprs[f"{v.id}.{j}[{i}]"] for j in range(1, beta)]
            W = vandermonde_bracket(aut, vd, i, 0)
            # X(i,0) = beta * W(i) * (1 + sum_j Y(i,j))^{-1}
            denom = Inverse(Sum([const(1)] + ys))
            if W.is_one():
                x0 = Scale(Coefficient.rational(beta), denom)
            else:
                x0 = Scale(Coefficient.rational(beta), Product((_poly_expr(sub, W), denom)))
            xs = [x0] + [Product((x0, y)) for y in ys]
            mexpr: list[RationalExpr] = [const(1)]
            for k in range(1, beta):
                row = (k + 1) % beta if "vandermonde" in faults else k
                coeffs = [Coefficient.rational(Fraction(1, beta)) * vd.omega ** ((-j * row) % beta)
                          for j in range(beta)]
                q = linear_combination(list(zip(coeffs, xs)))
                mexpr.append(_divide_right(q, vandermonde_bracket(aut, vd, i, k), sub))
            for k in range(2, beta):
                sub.add_known(aut.M(v.id, i, k), mexpr[k])
            for k in range(1, beta):
                name = letters[i + (k - 1) * tau]
                if k == 1:
                    sub.mapping[name] = mexpr[1]
                else:
                    sub.mapping[name] = Product((Inverse(mexpr[k - 1]), mexpr[k]))
    for pd in pairs:
        p = pd.pair
        letters = aut.alphabet.pair_letters[p.key]
        for j in range(pd.length):
            parts: list[RationalExpr] = []
            if not pd.L[j].is_one():
                parts.append(Inverse(sub.element(pd.L[j])))
            parts.append(element_exprs[f"t.{p.label}[{j}]"])
            if not pd.R[j].is_one():
                parts.append(Inverse(sub.element(pd.R[j])))
            sub.mapping[letters[j]] = parts[0] if len(parts) == 1 else Product(parts)
    return {s: sub.mapping[s] for s in aut.alphabet}


# -- orchestration ----------------------------------------------------------------------


@dataclass
class DiagonalisationResult:
    aut: TwistedAutomorphism
    field_order: int
    vertices: dict[str, VertexDiagonalisers]
    pairs: list[PairDiagonalisers]
    blocks: list[Block]
    basis: DiagonalBasis
    checks: list[CheckResult]

    @property
    def generators(self) -> list[Generator]:
        return self.basis.generators

    @property
    def inverse(self) -> dict[str, RationalExpr]:
        return self.basis.inverse

    @property
    def eigenvalues(self) -> list[Coefficient]:
        return [g.eigenvalue for g in self.basis.generators]

    def all_exact_passed(self) -> bool:
        return all(c.passed for c in self.checks)


def vertex_blocks(vd: VertexDiagonalisers) -> list[Block]:
    out = []
    for j in range(1, vd.beta):
        steps = [Coefficient.one()] * (vd.tau - 1) + [vd.omega ** ((-j) % vd.beta)]
        out.append(Block(f"{vd.vertex}.{j}", "vertex", [vd.Y[(i, j)] for i in range(vd.tau)], steps,
                         provenance={"kind": "vertex", "vertex": vd.vertex, "j": j}))
    return out


def pair_block(aut: TwistedAutomorphism, pd: PairDiagonalisers) -> Block:
    p = pd.pair
    letters = aut.alphabet.pair_letters[p.key]
    steps = [aut.twist_map.get(s, Coefficient.one()) for s in letters]
    steps[-1] = steps[-1] * pd.mu * pd.nu
    return Block(f"t.{p.label}", "pair", [Leaf(t) for t in pd.T], steps, exact=list(pd.T),
                 provenance={"kind": "pair", "e": p.e, "f": p.f, "i": p.index})


def diagonalize(aut: TwistedAutomorphism, faults: Iterable[str] = (), strict: bool = True) -> DiagonalisationResult:
    """Run the whole synthesis: per-vertex and per-pair diagonalisers, Fourier step, back-substitution.

    With ``strict`` any failed exact post-check raises :class:`PostCheckFailed`;
    otherwise failures are only recorded in ``checks``.
    """
    faults = set(faults)
    unknown = faults - set(FAULTS)
    if unknown:
        raise ValueError(f"unknown fault injections {sorted(unknown)}; choose from {FAULTS}")
    N = conductor(aut)
    vertices = {v.id: synth_vertex(aut, v.id, N, faults, strict=False) for v in aut.tree.level_order}
    pairs = [synth_pair(aut, p, faults, strict=False) for p in aut.tree.pairs]
    blocks: list[Block] = []
    for v in aut.tree.vertices:
        blocks.extend(vertex_blocks(vertices[v.id]))
    blocks.extend(pair_block(aut, pd) for pd in pairs)

    gens, expansions = fourier_diagonalize(blocks, N, faults)
    checks: list[CheckResult] = []
    for vd in vertices.values():
        checks.extend(vd.checks)
    for pd in pairs:
        checks.extend(pd.checks)
    for g in gens:
        if g.exact is not None:
            checks.append(_exact(f"eigen.{g.name}", aut.apply(g.exact), g.exact.scale(g.eigenvalue),
                                 f"phi~(g) = theta g with theta = {g.eigenvalue}"))
    ok = len(gens) == len(aut.alphabet)
    checks.append(CheckResult("count", "exact", ok, "" if ok else f"{len(gens)} generators for {len(aut.alphabet)} letters",
                              {"generators": len(gens), "letters": len(aut.alphabet)}))

    gen_leaf = {g.name: leaf(g.name) for g in gens}
    element_exprs = {label: linear_combination([(c, gen_leaf[name]) for c, name in terms])
                     for label, terms in expansions.items()}
    inverse = back_substitute(aut, vertices, pairs, element_exprs, faults)

    if strict:
        failed = [c for c in checks if not c.passed]
        if failed:
            raise PostCheckFailed(failed)
    return DiagonalisationResult(aut, N, vertices, pairs, blocks, DiagonalBasis(gens, inverse), checks)
