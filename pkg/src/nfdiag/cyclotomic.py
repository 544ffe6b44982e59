"""Exact arithmetic in cyclotomic fields Q(zeta_N).

Elements are rational coefficient vectors over the power basis
``1, z, ..., z^(phi(N)-1)`` of ``Q(z)`` with ``z = exp(2*pi*i/N)``.  Elements of
different fields are combined by lifting both into ``Q(zeta_lcm)``.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

Rational = Fraction | int


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Integer coefficients (lowest degree first) of the n-th cyclotomic polynomial."""
    if n < 1:
        raise ValueError("n must be positive")
    num = [-1] + [0] * (n - 1) + [1]  # x^n - 1
    for d in range(1, n):
        if n % d == 0:
            num = _exact_divide(num, list(cyclotomic_poly(d)))
    return tuple(num)


def _exact_divide(num: list[int], den: list[int]) -> list[int]:
    # den is monic
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        q = num[i + len(den) - 1]
        out[i] = q
        if q:
            for j, c in enumerate(den):
                num[i + j] -= q * c
    if any(num[: len(den) - 1]):
        raise ArithmeticError("inexact polynomial division")
    return out


@lru_cache(maxsize=None)
def _power_table(n: int) -> tuple[tuple[int, ...], ...]:
    """Row k holds z^k reduced modulo Phi_n, for k in [0, n)."""
    phi = cyclotomic_poly(n)
    deg = len(phi) - 1
    rows = []
    cur = [1] + [0] * (deg - 1)
    for _ in range(n):
        rows.append(tuple(cur))
        top = cur[-1]
        cur = [0] + cur[:-1]
        if top:
            for j in range(deg):
                cur[j] -= top * phi[j]
    return tuple(rows)


def euler_phi(n: int) -> int:
    return len(cyclotomic_poly(n)) - 1


def _poly_trim(p: list[Fraction]) -> list[Fraction]:
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_divmod(a: list[Fraction], b: list[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    a = list(a)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    lead = b[-1]
    for i in range(len(a) - len(b), -1, -1):
        f = a[i + len(b) - 1] / lead
        q[i] = f
        if f:
            for j, c in enumerate(b):
                a[i + j] -= f * c
    return _poly_trim(q), _poly_trim(a[: len(b) - 1])


def _poly_sub(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * max(len(a), len(b))
    for i, c in enumerate(a):
        out[i] += c
    for i, c in enumerate(b):
        out[i] -= c
    return _poly_trim(out)


def _poly_mul(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _poly_trim(out)


class Cyclotomic:
    """An element of the cyclotomic field Q(zeta_n)."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs: Sequence[Rational]):
        deg = euler_phi(n)
        if len(coeffs) != deg:
            raise ValueError(f"expected {deg} coefficients for Q(zeta_{n}), got {len(coeffs)}")
        self.n = n
        self.coeffs = tuple(Fraction(c) for c in coeffs)

    # -- constructors -------------------------------------------------------

    @classmethod
    def rational(cls, q: Rational, n: int = 1) -> Cyclotomic:
        deg = euler_phi(n)
        return cls(n, [Fraction(q)] + [Fraction(0)] * (deg - 1))

    @classmethod
    def zeta(cls, num: int, den: int, n: int | None = None) -> Cyclotomic:
        """``exp(2 pi i num/den)`` as an element of Q(zeta_n); n defaults to den."""
        if den < 1:
            raise ValueError("den must be positive")
        n = den if n is None else n
        if n % den:
            raise ValueError(f"zeta_{den} does not live in Q(zeta_{n})")
        k = (num * (n // den)) % n
        return cls(n, _power_table(n)[k])

    @classmethod
    def from_angle(cls, angle: Fraction, n: int = 1) -> Cyclotomic:
        """``exp(2 pi i angle)`` in the smallest field containing it and Q(zeta_n)."""
        angle = Fraction(angle) % 1
        m = math.lcm(n, angle.denominator)
        return cls.zeta(angle.numerator, angle.denominator, m)

    # -- structure ----------------------------------------------------------

    def lift(self, m: int) -> Cyclotomic:
        if m == self.n:
            return self
        if m % self.n:
            raise ValueError(f"cannot lift Q(zeta_{self.n}) into Q(zeta_{m})")
        table = _power_table(m)
        step = m // self.n
        out = [Fraction(0)] * euler_phi(m)
        for k, c in enumerate(self.coeffs):
            if c:
                for j, r in enumerate(table[k * step]):
                    if r:
                        out[j] += c * r
        return Cyclotomic(m, out)

    def _common(self, other: Cyclotomic) -> tuple[Cyclotomic, Cyclotomic]:
        if self.n == other.n:
            return self, other
        m = math.lcm(self.n, other.n)
        return self.lift(m), other.lift(m)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.coeffs[0]

    def as_root_of_unity(self) -> tuple[Fraction, Fraction] | None:
        """Return ``(q, angle)`` with q > 0 and self == q * exp(2 pi i angle), else None."""
        if self.is_zero():
            return None
        table = _power_table(self.n)
        for a, row in enumerate(table):
            idx = next(i for i, r in enumerate(row) if r)
            ratio = self.coeffs[idx] / row[idx]
            if ratio and all(c == ratio * r for c, r in zip(self.coeffs, row)):
                angle = Fraction(a, self.n)
                if ratio < 0:
                    ratio = -ratio
                    angle = (angle + Fraction(1, 2)) % 1
                return ratio, angle
        return None

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: Cyclotomic | Rational) -> Cyclotomic:
        if not isinstance(other, Cyclotomic):
            other = Cyclotomic.rational(other, self.n)
        a, b = self._common(other)
        return Cyclotomic(a.n, [x + y for x, y in zip(a.coeffs, b.coeffs)])

    __radd__ = __add__

    def __neg__(self) -> Cyclotomic:
        return Cyclotomic(self.n, [-c for c in self.coeffs])

    def __sub__(self, other: Cyclotomic | Rational) -> Cyclotomic:
        return self + (-other)

    def __rsub__(self, other: Rational) -> Cyclotomic:
        return (-self) + other

    def __mul__(self, other: Cyclotomic | Rational) -> Cyclotomic:
        if not isinstance(other, Cyclotomic):
            q = Fraction(other)
            return Cyclotomic(self.n, [c * q for c in self.coeffs])
        a, b = self._common(other)
        n = a.n
        if a.is_rational():
            return b * a.coeffs[0]
        if b.is_rational():
            return a * b.coeffs[0]
        acc = [Fraction(0)] * n
        for i, x in enumerate(a.coeffs):
            if x:
                for j, y in enumerate(b.coeffs):
                    if y:
                        acc[(i + j) % n] += x * y
        table = _power_table(n)
        out = [Fraction(0)] * euler_phi(n)
        for k, c in enumerate(acc):
            if c:
                for j, r in enumerate(table[k]):
                    if r:
                        out[j] += c * r
        return Cyclotomic(n, out)

    __rmul__ = __mul__

    def inverse(self) -> Cyclotomic:
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in a cyclotomic field")
        if self.is_rational():
            return Cyclotomic.rational(1 / self.coeffs[0], self.n)
        # extended Euclid: s*a + t*phi = g, g a nonzero constant
        phi = [Fraction(c) for c in cyclotomic_poly(self.n)]
        r0, r1 = phi, _poly_trim(list(self.coeffs))
        s0: list[Fraction] = []
        s1: list[Fraction] = [Fraction(1)]
        while len(r1) > 1:
            q, r = _poly_divmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, _poly_sub(s0, _poly_mul(q, s1))
        g = r1[0]
        deg = euler_phi(self.n)
        s = [c / g for c in s1]
        if len(s) > deg:
            s = _poly_divmod(s, phi)[1]
        return Cyclotomic(self.n, s + [Fraction(0)] * (deg - len(s)))

    def __truediv__(self, other: Cyclotomic | Rational) -> Cyclotomic:
        if not isinstance(other, Cyclotomic):
            return self * (1 / Fraction(other))
        return self * other.inverse()

    def __pow__(self, k: int) -> Cyclotomic:
        if k < 0:
            return self.inverse() ** (-k)
        out = Cyclotomic.rational(1, self.n)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.coeffs[0] == other
        if not isinstance(other, Cyclotomic):
            return NotImplemented
        a, b = self._common(other)
        return a.coeffs == b.coeffs

    __hash__ = None  # type: ignore[assignment]

    def to_complex(self) -> complex:
        z = cmath.exp(2j * math.pi / self.n)
        return complex(sum(float(c) * z**k for k, c in enumerate(self.coeffs) if c))

    def to_mpc(self, ctx):
        """Value in an mpmath context at that context's working precision."""
        z = ctx.expjpi(ctx.mpf(2) / self.n)
        return ctx.fsum(ctx.mpf(c.numerator) / c.denominator * z**k for k, c in enumerate(self.coeffs) if c)

    def __repr__(self) -> str:
        return f"Cyclotomic({self.n}, {[str(c) for c in self.coeffs]})"

    def __str__(self) -> str:
        root = self.as_root_of_unity()
        if root is not None:
            q, angle = root
            if angle == 0:
                return str(q)
            if angle == Fraction(1, 2):
                return str(-q)
            z = f"zeta({angle.denominator})"
            if angle.numerator != 1:
                z += f"^{angle.numerator}"
            return z if q == 1 else f"{q}*{z}"
        parts = []
        for k, c in enumerate(self.coeffs):
            if c:
                if k == 0:
                    parts.append(str(c))
                else:
                    z = f"zeta({self.n})" + (f"^{k}" if k > 1 else "")
                    parts.append(z if c == 1 else f"{c}*{z}")
        return "(" + " + ".join(parts) + ")"
