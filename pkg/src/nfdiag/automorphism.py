"""The free-group automorphism of an n,n1-tree and its diagonal twists."""

from __future__ import annotations

import math
from typing import Mapping, overload

from .freegroup import FreeWord, word_product
from .grpalg import GroupAlgebraElement
from .nntree import ROOT, Alphabet, NNTree, PairFamily, build_alphabet, compute_n1
from .ratexpr import RationalExpr, map_leaves
from .scalar import Coefficient


class OrderMismatch(RuntimeError):
    def __init__(self, found: int | None, expected: int):
        self.found, self.expected = found, expected
        super().__init__(f"automorphism order {found} differs from n1 = {expected}")


class RecursionOracleMismatch(RuntimeError):
    pass


def _maximal_proper_divisors(n: int) -> list[int]:
    primes = [p for p in range(2, n + 1) if n % p == 0 and all(p % q for q in range(2, p))]
    return [n // p for p in primes]


class TwistedAutomorphism:
    """phi~ = phi o diag(t): letter s maps to t_s * phi(s).

    Untwisted word data (letter images, D-sequences, lambda) is shared between
    an automorphism and all its twists; only the scalar caches differ.
    """

    def __init__(self, tree: NNTree, *, check_order: bool = True):
        self.tree = tree
        self.alphabet: Alphabet = build_alphabet(tree)
        self.n1 = compute_n1(tree)
        self.twist_map: dict[str, Coefficient] = {}
        self._images: dict[str, FreeWord] = {}
        self._dseq: dict[str, list[FreeWord]] = {}
        self._mcache: dict[tuple[str, int, int], FreeWord] = {}
        self._phi_cache: dict[FreeWord, FreeWord] = {}
        self._lambda: dict[str, tuple[int, int]] = {}
        self._periodic = False
        self._reset_scalars()
        self._build()
        self._order: int | None = None
        if check_order:
            found = self.order()
            if found != self.n1:
                raise OrderMismatch(found, self.n1)
        self._periodic = self._order == self.n1

    def _reset_scalars(self) -> None:
        self._chi_cache: dict[FreeWord, Coefficient] = {}
        self._apply_cache: dict[FreeWord, tuple[Coefficient, FreeWord]] = {}

    # -- construction of phi ------------------------------------------------

    def _build(self) -> None:
        tree = self.tree
        for v in tree.level_order:
            letters = self.alphabet.vertex_letters[v.id]
            self._dseq[v.id] = [FreeWord.letter(s) for s in letters]
            for j in range(len(letters) - 1):
                self._images[letters[j]] = FreeWord.letter(letters[j + 1])
            self._images[letters[-1]] = self.M(v.id, 0, v.beta - 1).inverse() * self.M(v.parent, 0, v.alpha)
        for p in tree.pairs:
            letters = self.alphabet.pair_letters[p.key]
            for j in range(len(letters) - 1):
                self._images[letters[j]] = FreeWord.letter(letters[j + 1])
            self._images[letters[-1]] = word_product(
                (self.M(p.f, 0, p.rho).inverse(), FreeWord.letter(letters[0]), self.M(p.e, p.eta, p.delta))
            )

    def image(self, letter: str) -> FreeWord:
        return self._images[letter]

    def letter_map(self) -> dict[str, tuple[Coefficient, FreeWord]]:
        return {s: (self.twist_map.get(s, Coefficient.one()), self._images[s]) for s in self.alphabet}

    def phi(self, w: FreeWord) -> FreeWord:
        """The untwisted automorphism applied to a word."""
        if w in self._phi_cache:
            return self._phi_cache[w]
        out = FreeWord.identity()
        for s, e in w:
            img = self._images[s]
            out = out * (img if e == 1 else img.inverse())
        self._phi_cache[w] = out
        return out

    def D(self, vid: str, j: int) -> FreeWord:
        """D_j = phi^j(D_0) for vertex ``vid``; the root gives the empty word."""
        if vid == ROOT:
            return FreeWord.identity()
        if j < 0:
            if not self._periodic:
                raise ValueError("negative D index needs a verified order")
            j %= self.n1
        elif self._periodic and j >= self.n1:
            j %= self.n1
        seq = self._dseq[vid]
        while len(seq) <= j:
            seq.append(self.phi(seq[-1]))
        return seq[j]

    def M(self, vid: str, j: int, k: int) -> FreeWord:
        """M_d(j,k) = D_j D_{j+tau} ... D_{j+(k-1)tau}; M_d(j,0) is the identity."""
        if vid == ROOT or k == 0:
            return FreeWord.identity()
        key = (vid, j, k)
        if key not in self._mcache:
            tau = self.tree.tau(vid)
            self._mcache[key] = self.M(vid, j, k - 1) * self.D(vid, j + (k - 1) * tau)
        return self._mcache[key]

    # -- order ----------------------------------------------------------------

    def order(self, limit: int | None = None) -> int | None:
        """Smallest m >= 1 with phi^m the identity on every letter (None past ``limit``)."""
        if self._order is not None:
            return self._order
        letters = list(self.alphabet)
        limit = limit or max(self.n1, 1)
        cur = {s: FreeWord.letter(s) for s in letters}
        self._identity_at: dict[int, bool] = {}
        found = None
        for m in range(1, limit + 1):
            cur = {s: self.phi(w) for s, w in cur.items()}
            is_id = all(w == FreeWord.letter(s) for s, w in cur.items())
            self._identity_at[m] = is_id
            if is_id and found is None:
                found = m
                break
        self._order = found
        self._periodic = found == self.n1
        return found

    def order_report(self) -> dict:
        """Order, n1 and the check that phi^m != id for each maximal proper divisor m of n1."""
        found = self.order()
        divisors = _maximal_proper_divisors(self.n1) if self.n1 > 1 else []
        checks = {}
        for m in divisors:
            pw = {s: FreeWord.letter(s) for s in self.alphabet}
            for _ in range(m):
                pw = {s: self.phi(w) for s, w in pw.items()}
            checks[m] = any(w != FreeWord.letter(s) for s, w in pw.items())
        return {"order": found, "n1": self.n1, "proper_divisors_nontrivial": checks,
                "ok": found == self.n1 and all(checks.values())}

    # -- lambda, u, v -----------------------------------------------------------

    def lambda_oracle(self, vid: str) -> int:
        """Smallest k >= 1 with M_d(0,k) = 1, by direct word reduction."""
        if vid == ROOT:
            return 1
        bound = self.tree.gamma(vid)
        for k in range(1, bound + 1):
            if self.M(vid, 0, k).is_identity():
                return k
        raise RecursionOracleMismatch(f"no k <= gamma_{vid} = {bound} with M_{vid}(0,k) = 1")

    def lam(self, vid: str, verify: bool = True) -> tuple[int, int]:
        """(lambda_d, u_d) with lambda_d = u_d * beta_d; the root gives (1, 1)."""
        if vid == ROOT:
            return (1, 1)
        if vid in self._lambda:
            return self._lambda[vid]
        v = self.tree.vertex(vid)
        if v.parent == ROOT:
            lam = v.beta
        else:
            lam_c, _ = self.lam(v.parent, verify)
            mu = math.lcm(lam_c, v.alpha)
            lam = (mu // v.alpha) * v.beta
        if verify:
            brute = self.lambda_oracle(vid)
            if brute != lam:
                raise RecursionOracleMismatch(f"lambda_{vid}: recursion gives {lam}, word oracle gives {brute}")
        self._lambda[vid] = (lam, lam // v.beta)
        return self._lambda[vid]

    def u_v(self, pair: PairFamily, verify: bool = True) -> tuple[int, int]:
        lam_f, _ = self.lam(pair.f, verify)
        lam_e, _ = self.lam(pair.e, verify)
        u = lam_f // math.gcd(lam_f, pair.rho)
        v = lam_e // math.gcd(lam_e, pair.delta)
        if verify:
            bu = next(k for k in range(1, lam_f + 1) if self.M(pair.f, 0, k * pair.rho).is_identity())
            bv = next(k for k in range(1, lam_e + 1) if self.M(pair.e, 0, k * pair.delta).is_identity())
            if (bu, bv) != (u, v):
                raise RecursionOracleMismatch(f"pair {pair.label}: (u,v) = {(u, v)} but oracle gives {(bu, bv)}")
        return u, v

    # -- twist ------------------------------------------------------------------

    def twisted(self, twist: Mapping[str, Coefficient | str | int]) -> TwistedAutomorphism:
        """A copy sharing all word data, with letter s sent to twist[s] * phi(s)."""
        tw: dict[str, Coefficient] = {}
        for s, c in twist.items():
            if s not in self.alphabet:
                raise ValueError(f"twist names unknown letter {s!r}")
            c = c if isinstance(c, Coefficient) else Coefficient.from_json(c)
            if c.is_zero():
                raise ValueError(f"zero twist scalar on {s}")
            if not c.is_term():
                raise ValueError(f"twist scalar on {s} must be a single term, got {c}")
            if not c.is_one():
                tw[s] = c
        out = object.__new__(TwistedAutomorphism)
        out.__dict__.update(self.__dict__)
        out.twist_map = tw
        out._reset_scalars()
        return out

    def is_twisted(self) -> bool:
        return bool(self.twist_map)

    def chi(self, w: FreeWord) -> Coefficient:
        """Scalar character of the twist on a word: prod t_s^e."""
        if not self.twist_map:
            return Coefficient.one()
        if w not in self._chi_cache:
            out = Coefficient.one()
            for s, e in w:
                t = self.twist_map.get(s)
                if t is not None:
                    out = out * (t if e == 1 else t.inv())
            self._chi_cache[w] = out
        return self._chi_cache[w]

    def d(self, vid: str, j: int) -> Coefficient:
        """Scalar d_j with phi~(D_{j-1}) = d_j D_j."""
        if vid == ROOT:
            return Coefficient.one()
        return self.chi(self.D(vid, j - 1))

    def m(self, vid: str, j: int, k: int) -> Coefficient:
        """m_d(j,k) = prod_{l<k} d_{j + l tau_d}; m_d(j,0) = 1."""
        out = Coefficient.one()
        if vid == ROOT:
            return out
        tau = self.tree.tau(vid)
        for l in range(k):
            out = out * self.d(vid, j + l * tau)
        return out

    # -- application ------------------------------------------------------------

    def apply_word(self, w: FreeWord) -> tuple[Coefficient, FreeWord]:
        if w not in self._apply_cache:
            self._apply_cache[w] = (self.chi(w), self.phi(w))
        return self._apply_cache[w]

    def apply_element(self, g: GroupAlgebraElement) -> GroupAlgebraElement:
        out = []
        for w, c in g.terms:
            t, img = self.apply_word(w)
            out.append((img, c * t))
        return GroupAlgebraElement(out)

    @overload
    def apply(self, target: FreeWord) -> FreeWord | GroupAlgebraElement: ...
    @overload
    def apply(self, target: GroupAlgebraElement) -> GroupAlgebraElement: ...
    @overload
    def apply(self, target: RationalExpr) -> RationalExpr: ...

    def apply(self, target):
        """Apply phi~ to a word, group-algebra element or rational expression.

        A word comes back as a word when the twist contributes no scalar, and
        as a one-term group-algebra element otherwise.
        """
        if isinstance(target, FreeWord):
            c, img = self.apply_word(target)
            return img if c.is_one() else GroupAlgebraElement.word(img, c)
        if isinstance(target, GroupAlgebraElement):
            return self.apply_element(target)
        if isinstance(target, RationalExpr):
            return map_leaves(target, self.apply_element)
        raise TypeError(f"cannot apply an automorphism to {type(target).__name__}")


def build_phi(tree: NNTree, check_order: bool = True) -> TwistedAutomorphism:
    return TwistedAutomorphism(tree, check_order=check_order)
