"""Reduced words in a free group over string-named letters."""

from __future__ import annotations

from typing import Iterable, Iterator, Tuple

Syllable = Tuple[str, int]

MAX_WORD_LENGTH = 10**6


class WordTooLong(ValueError):
    pass


def _reduce(letters: Iterable[Syllable], cap: int = MAX_WORD_LENGTH) -> tuple[Syllable, ...]:
    stack: list[Syllable] = []
    for name, exp in letters:
        if exp not in (1, -1):
            raise ValueError(f"exponent must be +1 or -1, got {exp!r}")
        if stack and stack[-1][0] == name and stack[-1][1] == -exp:
            stack.pop()
        else:
            stack.append((name, exp))
            if len(stack) > cap:
                raise WordTooLong(f"word exceeds {cap} letters")
    return tuple(stack)


class FreeWord:
    """An element of a free group, always stored in reduced form.

    Letters are arbitrary strings; a word is a sequence of ``(letter, +-1)``
    pairs with no adjacent cancelling pair.  The empty word is the identity.
    """

    __slots__ = ("_letters", "_hash")

    def __init__(self, letters: Iterable[Syllable] = ()):
        self._letters = _reduce(letters)
        self._hash = hash(self._letters)

    @classmethod
    def _trusted(cls, letters: tuple[Syllable, ...]) -> FreeWord:
        w = cls.__new__(cls)
        w._letters = letters
        w._hash = hash(letters)
        return w

    @classmethod
    def letter(cls, name: str, exp: int = 1) -> FreeWord:
        return cls._trusted(((name, exp),))

    @classmethod
    def identity(cls) -> FreeWord:
        return _IDENTITY

    @property
    def letters(self) -> tuple[Syllable, ...]:
        return self._letters

    def is_identity(self) -> bool:
        return not self._letters

    def __len__(self) -> int:
        return len(self._letters)

    def __iter__(self) -> Iterator[Syllable]:
        return iter(self._letters)

    def __mul__(self, other: FreeWord) -> FreeWord:
        if not isinstance(other, FreeWord):
            return NotImplemented
        a, b = self._letters, other._letters
        if not a:
            return other
        if not b:
            return self
        # cancellation only happens at the seam
        i, j = len(a), 0
        while i > 0 and j < len(b) and a[i - 1][0] == b[j][0] and a[i - 1][1] == -b[j][1]:
            i -= 1
            j += 1
        out = a[:i] + b[j:]
        if len(out) > MAX_WORD_LENGTH:
            raise WordTooLong(f"word exceeds {MAX_WORD_LENGTH} letters")
        return FreeWord._trusted(out)

    def inverse(self) -> FreeWord:
        return FreeWord._trusted(tuple((s, -e) for s, e in reversed(self._letters)))

    def __pow__(self, k: int) -> FreeWord:
        if k < 0:
            return self.inverse() ** (-k)
        out = _IDENTITY
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def support(self) -> set[str]:
        return {s for s, _ in self._letters}

    def sort_key(self) -> tuple:
        return (len(self._letters), self._letters)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FreeWord) and self._letters == other._letters

    def __lt__(self, other: FreeWord) -> bool:
        return self.sort_key() < other.sort_key()

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"FreeWord({self})"

    def __str__(self) -> str:
        if not self._letters:
            return "1"
        return " ".join(s if e == 1 else f"{s}^-1" for s, e in self._letters)

    @classmethod
    def parse(cls, text: str) -> FreeWord:
        """Parse the space-separated textual form; ``"1"`` is the identity."""
        text = text.strip()
        if text in ("", "1"):
            return _IDENTITY
        out = []
        for tok in text.split():
            if tok.endswith("^-1"):
                out.append((tok[:-3], -1))
            elif tok.endswith("^1"):
                out.append((tok[:-2], 1))
            else:
                out.append((tok, 1))
            if not out[-1][0] or "^" in out[-1][0]:
                raise ValueError(f"bad letter token {tok!r}")
        return cls(out)


_IDENTITY = FreeWord._trusted(())


def concat(u: FreeWord, v: FreeWord) -> FreeWord:
    return u * v


def invert(u: FreeWord) -> FreeWord:
    return u.inverse()


def word_product(words: Iterable[FreeWord]) -> FreeWord:
    out = _IDENTITY
    for w in words:
        out = out * w
    return out
