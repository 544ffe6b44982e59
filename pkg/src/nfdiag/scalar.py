"""Exact scalars: sums of (cyclotomic number) x (monomial with rational exponents).

A *term* is ``z * s1^e1 * ... * sk^ek`` with ``z`` in some cyclotomic field and
rational exponents ``ei`` on named symbols.  A :class:`Coefficient` is a finite
sum of terms with pairwise distinct monomials.  Symbols stand for nonzero
complex numbers and are only bound to values in :meth:`Coefficient.instantiate`,
which uses the principal branch ``s^e = exp(e * Log s)`` so that exact
identities between monomials survive evaluation.

Irrational real roots of positive rationals are kept exact by adjoining
prime-radical symbols named ``@p`` (value ``p``) whose exponents are reduced
into ``[0, 1)``.
"""

from __future__ import annotations

import cmath
import math
import re
from fractions import Fraction
from typing import Iterable, Mapping

from .cyclotomic import Cyclotomic

Monomial = tuple[tuple[str, Fraction], ...]

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*$")


class MissingSymbol(KeyError):
    pass


def _is_prime_symbol(name: str) -> bool:
    return name.startswith("@")


def _normalize_monomial(exps: Mapping[str, Fraction]) -> tuple[Monomial, Fraction]:
    """Canonical monomial plus the rational factor pulled out of prime radicals."""
    factor = Fraction(1)
    out = []
    for name in sorted(exps):
        e = Fraction(exps[name])
        if _is_prime_symbol(name):
            whole = math.floor(e)
            if whole:
                factor *= Fraction(int(name[1:])) ** whole
                e -= whole
        if e:
            out.append((name, e))
    return tuple(out), factor


def _mono_mul(a: Monomial, b: Monomial) -> tuple[Monomial, Fraction]:
    if not a:
        return b, Fraction(1)
    if not b:
        return a, Fraction(1)
    acc: dict[str, Fraction] = dict(a)
    for s, e in b:
        acc[s] = acc.get(s, Fraction(0)) + e
    return _normalize_monomial(acc)


def _factorize(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _exact_int_root(n: int, k: int) -> int | None:
    r = round(n ** (1.0 / k)) if n else 0
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**k == n:
            return cand
    return None


class Coefficient:
    """Immutable normalized sum of scalar terms."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Iterable[tuple[Monomial | Mapping[str, Fraction], Cyclotomic]] = ()):
        acc: dict[Monomial, Cyclotomic] = {}
        for mono, cyc in terms:
            mono, factor = _normalize_monomial(dict(mono))
            if factor != 1:
                cyc = cyc * factor
            if mono in acc:
                acc[mono] = acc[mono] + cyc
            else:
                acc[mono] = cyc
        self._terms: tuple[tuple[Monomial, Cyclotomic], ...] = tuple(
            (m, c) for m, c in sorted(acc.items(), key=lambda kv: _mono_key(kv[0])) if not c.is_zero()
        )

    @classmethod
    def _trusted(cls, terms: tuple[tuple[Monomial, Cyclotomic], ...]) -> Coefficient:
        c = cls.__new__(cls)
        c._terms = terms
        return c

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls) -> Coefficient:
        return _ZERO

    @classmethod
    def one(cls) -> Coefficient:
        return _ONE

    @classmethod
    def rational(cls, q: Fraction | int | str) -> Coefficient:
        q = Fraction(q)
        return cls._trusted((((), Cyclotomic.rational(q)),)) if q else _ZERO

    @classmethod
    def root_of_unity(cls, num: int, den: int, field: int | None = None) -> Coefficient:
        """``exp(2 pi i num/den)``, placed in Q(zeta_field) when given."""
        n = den if field is None else math.lcm(field, den)
        return cls._trusted((((), Cyclotomic.zeta(num, den, n)),))

    @classmethod
    def symbol(cls, name: str, exp: Fraction | int = 1) -> Coefficient:
        if not _IDENT.match(name) and not _is_prime_symbol(name):
            raise ValueError(f"invalid symbol name {name!r}")
        return cls([(((name, Fraction(exp)),), Cyclotomic.rational(1))])

    @classmethod
    def term(cls, cyc: Cyclotomic, exps: Mapping[str, Fraction] | None = None) -> Coefficient:
        return cls([(dict(exps or {}), cyc)])

    # -- inspection ---------------------------------------------------------

    @property
    def terms(self) -> tuple[tuple[Monomial, Cyclotomic], ...]:
        return self._terms

    def is_zero(self) -> bool:
        return not self._terms

    def is_term(self) -> bool:
        return len(self._terms) == 1

    def is_one(self) -> bool:
        return len(self._terms) == 1 and not self._terms[0][0] and self._terms[0][1] == 1

    def symbols(self) -> set[str]:
        return {s for mono, _ in self._terms for s, _ in mono if not _is_prime_symbol(s)}

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: Coefficient | int | Fraction) -> Coefficient:
        other = _coerce(other)
        if not other._terms:
            return self
        if not self._terms:
            return other
        return Coefficient(self._terms + other._terms)

    __radd__ = __add__

    def __neg__(self) -> Coefficient:
        return Coefficient._trusted(tuple((m, -c) for m, c in self._terms))

    def __sub__(self, other: Coefficient | int | Fraction) -> Coefficient:
        return self + (-_coerce(other))

    def __rsub__(self, other: int | Fraction) -> Coefficient:
        return _coerce(other) - self

    def __mul__(self, other: Coefficient | int | Fraction) -> Coefficient:
        other = _coerce(other)
        if not self._terms or not other._terms:
            return _ZERO
        if other.is_one():
            return self
        if self.is_one():
            return other
        out = []
        for ma, ca in self._terms:
            for mb, cb in other._terms:
                mono, factor = _mono_mul(ma, mb)
                cyc = ca * cb
                if factor != 1:
                    cyc = cyc * factor
                out.append((mono, cyc))
        if len(out) == 1:
            return Coefficient._trusted(tuple(out)) if not out[0][1].is_zero() else _ZERO
        return Coefficient(out)

    __rmul__ = __mul__

    def inv(self) -> Coefficient:
        """Inverse of a single term; sums of terms are not invertible here."""
        if not self._terms:
            raise ZeroDivisionError("inverse of zero coefficient")
        if len(self._terms) > 1:
            raise ValueError("only single-term coefficients can be inverted")
        mono, cyc = self._terms[0]
        return Coefficient([({s: -e for s, e in mono}, cyc.inverse())])

    def __truediv__(self, other: Coefficient | int | Fraction) -> Coefficient:
        return self * _coerce(other).inv()

    def __pow__(self, k: int) -> Coefficient:
        if k < 0:
            return self.inv() ** (-k)
        if self.is_term():
            mono, cyc = self._terms[0]
            return Coefficient([({s: e * k for s, e in mono}, cyc**k)])
        out = _ONE
        for _ in range(k):
            out = out * self
        return out

    def nth_root(self, k: int) -> Coefficient:
        """Principal k-th root of a term whose cyclotomic part is a root of unity times a positive rational.

        The root-of-unity angle a is mapped to a/k, the positive rational to its
        positive real root and every monomial exponent is divided by k.
        """
        if k <= 0:
            raise ValueError("root index must be positive")
        if not self.is_term():
            raise ValueError("nth_root needs a single nonzero term")
        mono, cyc = self._terms[0]
        root = cyc.as_root_of_unity()
        if root is None:
            raise ValueError(f"cyclotomic part {cyc} is not a root of unity times a rational")
        q, angle = root
        exps: dict[str, Fraction] = {s: e / k for s, e in mono}
        num = _exact_int_root(q.numerator, k)
        den = _exact_int_root(q.denominator, k)
        if num is not None and den is not None:
            qroot = Fraction(num, den)
        else:
            qroot = Fraction(1)
            for p, e in _factorize(q.numerator).items():
                exps[f"@{p}"] = exps.get(f"@{p}", Fraction(0)) + Fraction(e, k)
            for p, e in _factorize(q.denominator).items():
                exps[f"@{p}"] = exps.get(f"@{p}", Fraction(0)) - Fraction(e, k)
        return Coefficient([(exps, Cyclotomic.from_angle(angle / k, cyc.n) * qroot)])

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Coefficient.rational(other)
        if not isinstance(other, Coefficient):
            return NotImplemented
        if len(self._terms) != len(other._terms):
            return False
        return all(ma == mb and ca == cb for (ma, ca), (mb, cb) in zip(self._terms, other._terms))

    __hash__ = None  # type: ignore[assignment]

    # -- numerics -----------------------------------------------------------

    def instantiate(self, values: Mapping[str, complex]) -> complex:
        total = 0j
        for mono, cyc in self._terms:
            v = cyc.to_complex()
            for s, e in mono:
                if _is_prime_symbol(s):
                    base = complex(int(s[1:]))
                else:
                    try:
                        base = complex(values[s])
                    except KeyError:
                        raise MissingSymbol(s) from None
                    if base == 0:
                        raise ValueError(f"symbol {s} assigned zero")
                v *= base ** int(e) if e.denominator == 1 else cmath.exp(float(e) * cmath.log(base))
            total += v
        return total

    def instantiate_mp(self, values: Mapping[str, complex], ctx):
        """Like :meth:`instantiate`, evaluated in the mpmath context ``ctx``."""
        total = ctx.mpc(0)
        for mono, cyc in self._terms:
            v = cyc.to_mpc(ctx)
            for s, e in mono:
                if _is_prime_symbol(s):
                    base = ctx.mpc(int(s[1:]))
                else:
                    try:
                        base = ctx.mpc(complex(values[s]))
                    except KeyError:
                        raise MissingSymbol(s) from None
                    if base == 0:
                        raise ValueError(f"symbol {s} assigned zero")
                if e.denominator == 1:
                    v *= base ** int(e)
                else:
                    v *= ctx.exp(ctx.mpf(e.numerator) / e.denominator * ctx.log(base))
            total += v
        return total

    # -- text / json --------------------------------------------------------

    def __repr__(self) -> str:
        return f"Coefficient({str(self)!r})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        return " + ".join(_term_str(m, c) for m, c in self._terms)

    @classmethod
    def parse(cls, text: str) -> Coefficient:
        return _Parser(text).parse()

    def to_json(self) -> dict:
        if len(self._terms) == 1:
            js = _term_json(*self._terms[0])
            if js is not None:
                return js
        return {"terms": [_term_json(m, c) or _cyc_term_json(m, c) for m, c in self._terms]}

    @classmethod
    def from_json(cls, obj: dict | str | int | float) -> Coefficient:
        if isinstance(obj, str):
            return cls.parse(obj)
        if isinstance(obj, (int,)) and not isinstance(obj, bool):
            return cls.rational(obj)
        if not isinstance(obj, dict):
            raise ValueError(f"cannot read a coefficient from {obj!r}")
        if "terms" in obj:
            out = _ZERO
            for t in obj["terms"]:
                out = out + cls.from_json(t)
            return out
        exps = {s: Fraction(e) for s, e in obj.get("exponents", {}).items()}
        if "cyclotomic" in obj:
            cyc = obj["cyclotomic"]
            return cls([(exps, Cyclotomic(int(cyc["N"]), [Fraction(c) for c in cyc["coeffs"]]))])
        num, den = int(obj.get("zeta_num", 0)), int(obj.get("zeta_den", 1))
        cyc = Cyclotomic.zeta(num, den) * Fraction(obj.get("rational", "1"))
        return cls([(exps, cyc)])


def _mono_key(m: Monomial) -> tuple:
    return (len(m), m)


def _coerce(x: Coefficient | int | Fraction) -> Coefficient:
    if isinstance(x, Coefficient):
        return x
    if isinstance(x, (int, Fraction)):
        return Coefficient.rational(x)
    raise TypeError(f"cannot use {type(x).__name__} as a coefficient")


def _exp_str(e: Fraction) -> str:
    if e.denominator == 1:
        return str(e.numerator) if e > 0 else f"({e.numerator})"
    return f"({e.numerator}/{e.denominator})"


def _term_str(mono: Monomial, cyc: Cyclotomic) -> str:
    parts = []
    c = str(cyc)
    if c != "1" or not mono:
        parts.append(c)
    for s, e in mono:
        parts.append(s if e == 1 else f"{s}^{_exp_str(e)}")
    return " * ".join(parts)


def _term_json(mono: Monomial, cyc: Cyclotomic) -> dict | None:
    root = cyc.as_root_of_unity()
    if root is None:
        return None
    q, angle = root
    if angle == Fraction(1, 2):
        q, angle = -q, Fraction(0)
    return {
        "zeta_num": angle.numerator,
        "zeta_den": angle.denominator,
        "rational": str(q),
        "exponents": {s: str(e) for s, e in mono},
    }


def _cyc_term_json(mono: Monomial, cyc: Cyclotomic) -> dict:
    return {
        "cyclotomic": {"N": cyc.n, "coeffs": [str(c) for c in cyc.coeffs]},
        "exponents": {s: str(e) for s, e in mono},
    }


_ZERO = Coefficient._trusted(())
_ONE = Coefficient._trusted((((), Cyclotomic.rational(1)),))


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<zeta>zeta)|(?P<ident>@\d+|[A-Za-z_][A-Za-z0-9_.]*)|(?P<op>[-+*^()]))"
)


class _Parser:
    """Recursive-descent reader for the textual scalar form.

    Grammar: sum := term ('+' term)*; term := ['-'] factor ('*' factor)*;
    factor := atom ['^' exponent]; atom := number | zeta(N) | symbol | '(' sum ')'.
    """

    def __init__(self, text: str):
        self.text = text
        self.toks: list[tuple[str, str]] = []
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise ValueError(f"cannot parse scalar {self.text!r} at offset {pos}")
            kind = m.lastgroup
            self.toks.append((kind, m.group(kind)))
            pos = m.end()
        self.i = 0

    def _peek(self) -> tuple[str, str] | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def _take(self, value: str | None = None) -> tuple[str, str]:
        tok = self._peek()
        if tok is None or (value is not None and tok[1] != value):
            raise ValueError(f"cannot parse scalar {self.text!r}: expected {value or 'token'}")
        self.i += 1
        return tok

    def parse(self) -> Coefficient:
        out = self._sum()
        if self._peek() is not None:
            raise ValueError(f"trailing input in scalar {self.text!r}")
        return out

    def _sum(self) -> Coefficient:
        out = self._term()
        while self._peek() and self._peek()[1] in "+-" and self._peek()[0] == "op":
            if self._take()[1] == "+":
                out = out + self._term()
            else:
                out = out - self._term()
        return out

    def _term(self) -> Coefficient:
        sign = 1
        if self._peek() == ("op", "-"):
            self._take()
            sign = -1
        out = self._factor()
        while self._peek() == ("op", "*"):
            self._take()
            out = out * self._factor()
        return out * sign

    def _exponent(self) -> Fraction:
        tok = self._peek()
        if tok == ("op", "("):
            self._take()
            sign = -1 if self._peek() == ("op", "-") else 1
            if sign < 0:
                self._take()
            e = Fraction(self._take()[1]) * sign
            self._take(")")
            return e
        sign = -1 if tok == ("op", "-") else 1
        if sign < 0:
            self._take()
        kind, val = self._take()
        if kind != "num" or "/" in val:
            raise ValueError(f"bad exponent in scalar {self.text!r}")
        return Fraction(val) * sign

    def _factor(self) -> Coefficient:
        kind, val = self._take()
        if kind == "num":
            base = Coefficient.rational(Fraction(val))
        elif kind == "zeta":
            self._take("(")
            n = int(self._take()[1])
            self._take(")")
            base = Coefficient.root_of_unity(1, n)
        elif kind == "ident":
            base = Coefficient.symbol(val)
        elif val == "(":
            base = self._sum()
            self._take(")")
        else:
            raise ValueError(f"unexpected {val!r} in scalar {self.text!r}")
        if self._peek() == ("op", "^"):
            self._take()
            e = self._exponent()
            if e.denominator == 1:
                return base ** int(e)
            if base.is_term() and kind == "ident":
                return Coefficient.symbol(val, e)
            raise ValueError(f"fractional power of non-symbol in {self.text!r}")
        return base


def term_from_parts(zeta_num: int, zeta_den: int, rational: Fraction | int = 1,
                    exponents: Mapping[str, Fraction] | None = None) -> Coefficient:
    return Coefficient([(dict(exponents or {}), Cyclotomic.zeta(zeta_num, zeta_den) * Fraction(rational))])


def add(a: Coefficient, b: Coefficient) -> Coefficient:
    return a + b


def mul(a: Coefficient, b: Coefficient) -> Coefficient:
    return a * b


def inv(t: Coefficient) -> Coefficient:
    return t.inv()


def nth_root(t: Coefficient, k: int) -> Coefficient:
    return t.nth_root(k)


def instantiate(t: Coefficient, assignment: Mapping[str, complex]) -> complex:
    return t.instantiate(assignment)
