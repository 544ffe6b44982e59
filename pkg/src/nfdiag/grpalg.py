"""Group algebra of a free group: finite Coefficient-weighted sums of reduced words."""

from __future__ import annotations

from typing import Iterable, Mapping

from .freegroup import FreeWord
from .scalar import Coefficient

Scalarlike = Coefficient | int


def _as_coeff(c: Scalarlike) -> Coefficient:
    return c if isinstance(c, Coefficient) else Coefficient.rational(c)


class GroupAlgebraElement:
    """Immutable element of C[Gamma] with exact coefficients.

    Terms are kept sorted by word (length, then letters), so two elements are
    equal exactly when their term lists match.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Iterable[tuple[FreeWord, Scalarlike]] | Mapping[FreeWord, Scalarlike] = ()):
        if isinstance(terms, Mapping):
            terms = terms.items()
        acc: dict[FreeWord, Coefficient] = {}
        for w, c in terms:
            c = _as_coeff(c)
            acc[w] = acc[w] + c if w in acc else c
        self._terms = tuple(sorted(((w, c) for w, c in acc.items() if not c.is_zero()),
                                   key=lambda t: t[0].sort_key()))

    @classmethod
    def word(cls, w: FreeWord, coeff: Scalarlike = 1) -> GroupAlgebraElement:
        return cls([(w, coeff)])

    @classmethod
    def letter(cls, name: str, exp: int = 1) -> GroupAlgebraElement:
        return cls.word(FreeWord.letter(name, exp))

    @classmethod
    def zero(cls) -> GroupAlgebraElement:
        return cls()

    @classmethod
    def one(cls) -> GroupAlgebraElement:
        return cls.word(FreeWord.identity())

    @classmethod
    def scalar(cls, c: Scalarlike) -> GroupAlgebraElement:
        return cls.word(FreeWord.identity(), c)

    @property
    def terms(self) -> tuple[tuple[FreeWord, Coefficient], ...]:
        return self._terms

    def support(self) -> list[FreeWord]:
        return [w for w, _ in self._terms]

    def coefficient(self, w: FreeWord) -> Coefficient:
        for v, c in self._terms:
            if v == w:
                return c
        return Coefficient.zero()

    def letters(self) -> set[str]:
        return {s for w, _ in self._terms for s, _ in w}

    def symbols(self) -> set[str]:
        return {s for _, c in self._terms for s in c.symbols()}

    def is_nonzero(self) -> bool:
        return bool(self._terms)

    def is_one(self) -> bool:
        return len(self._terms) == 1 and self._terms[0][0].is_identity() and self._terms[0][1].is_one()

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    # -- ring operations ----------------------------------------------------

    def __add__(self, other: GroupAlgebraElement) -> GroupAlgebraElement:
        if not isinstance(other, GroupAlgebraElement):
            return NotImplemented
        return GroupAlgebraElement(self._terms + other._terms)

    def __neg__(self) -> GroupAlgebraElement:
        return self.scale(-1)

    def __sub__(self, other: GroupAlgebraElement) -> GroupAlgebraElement:
        return self + (-other)

    def scale(self, c: Scalarlike) -> GroupAlgebraElement:
        c = _as_coeff(c)
        if c.is_zero():
            return GroupAlgebraElement()
        return GroupAlgebraElement((w, c * a) for w, a in self._terms)

    def __mul__(self, other: GroupAlgebraElement | FreeWord | Coefficient | int) -> GroupAlgebraElement:
        if isinstance(other, FreeWord):
            return GroupAlgebraElement((w * other, a) for w, a in self._terms)
        if isinstance(other, (Coefficient, int)):
            return self.scale(other)
        if not isinstance(other, GroupAlgebraElement):
            return NotImplemented
        return GroupAlgebraElement(
            (u * v, a * b) for u, a in self._terms for v, b in other._terms
        )

    def __rmul__(self, other: FreeWord | Coefficient | int) -> GroupAlgebraElement:
        if isinstance(other, FreeWord):
            return GroupAlgebraElement((other * w, a) for w, a in self._terms)
        if isinstance(other, (Coefficient, int)):
            return self.scale(other)
        return NotImplemented

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GroupAlgebraElement):
            return NotImplemented
        if len(self._terms) != len(other._terms):
            return False
        return all(u == v and a == b for (u, a), (v, b) in zip(self._terms, other._terms))

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"GroupAlgebraElement({str(self)!r})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for w, c in self._terms:
            cs = str(c)
            if len(c.terms) > 1 or " + " in cs:
                cs = f"({cs})"
            parts.append(f"{cs} * {w}")
        return " + ".join(parts)

    def to_json(self) -> list[dict]:
        return [{"word": str(w), "coeff": c.to_json()} for w, c in self._terms]

    @classmethod
    def from_json(cls, obj: list[dict]) -> GroupAlgebraElement:
        return cls((FreeWord.parse(t["word"]), Coefficient.from_json(t["coeff"])) for t in obj)


def ga_add(a: GroupAlgebraElement, b: GroupAlgebraElement) -> GroupAlgebraElement:
    return a + b


def ga_mul(a: GroupAlgebraElement, b: GroupAlgebraElement) -> GroupAlgebraElement:
    return a * b


def ga_scale(e: GroupAlgebraElement, c: Scalarlike) -> GroupAlgebraElement:
    return e.scale(c)


def is_nonzero(e: GroupAlgebraElement) -> bool:
    return e.is_nonzero()
