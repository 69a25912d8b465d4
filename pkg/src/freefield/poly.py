"""Noncommutative polynomials with rational coefficients."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .als import Alphabet
from .linalg import format_rat

__all__ = ["NCPoly", "Word"]

Word = tuple[int, ...]  # 1-based letter indices


def word_key(w: Word):
    """Length-then-lexicographic order."""
    return (len(w), w)


@dataclass(frozen=True)
class NCPoly:
    alphabet: Alphabet
    terms: tuple[tuple[Word, Fraction], ...]

    @classmethod
    def from_dict(cls, alphabet: Alphabet, coeffs: Mapping[Word, object]) -> NCPoly:
        items = []
        for w, c in coeffs.items():
            c = Fraction(c)
            if c != 0:
                if any(not 1 <= i <= alphabet.d for i in w):
                    raise ValueError(f"word {w} uses letters outside the alphabet")
                items.append((tuple(w), c))
        items.sort(key=lambda t: word_key(t[0]))
        return cls(alphabet, tuple(items))

    @classmethod
    def zero(cls, alphabet: Alphabet) -> NCPoly:
        return cls(alphabet, ())

    @classmethod
    def constant(cls, alphabet: Alphabet, c) -> NCPoly:
        return cls.from_dict(alphabet, {(): c})

    @classmethod
    def monomial(cls, alphabet: Alphabet, word: Iterable[int], c=1) -> NCPoly:
        return cls.from_dict(alphabet, {tuple(word): c})

    @classmethod
    def letter(cls, alphabet: Alphabet, name: str) -> NCPoly:
        return cls.monomial(alphabet, (alphabet.index(name),))

    def as_dict(self) -> dict[Word, Fraction]:
        return dict(self.terms)

    def coeff(self, w: Word) -> Fraction:
        return self.as_dict().get(tuple(w), Fraction(0))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        return max((len(w) for w, _ in self.terms), default=-1)

    @property
    def is_constant(self) -> bool:
        return self.degree <= 0

    def _check(self, other: NCPoly):
        if other.alphabet != self.alphabet:
            raise ValueError("alphabet mismatch")

    def __add__(self, other: NCPoly) -> NCPoly:
        self._check(other)
        out = self.as_dict()
        for w, c in other.terms:
            out[w] = out.get(w, 0) + c
        return NCPoly.from_dict(self.alphabet, out)

    def __neg__(self) -> NCPoly:
        return NCPoly(self.alphabet, tuple((w, -c) for w, c in self.terms))

    def __sub__(self, other: NCPoly) -> NCPoly:
        return self + (-other)

    def __mul__(self, other) -> NCPoly:
        if not isinstance(other, NCPoly):
            return self.scale(other)
        self._check(other)
        out: dict[Word, Fraction] = {}
        for w1, c1 in self.terms:
            for w2, c2 in other.terms:
                w = w1 + w2
                out[w] = out.get(w, 0) + c1 * c2
        return NCPoly.from_dict(self.alphabet, out)

    def __rmul__(self, other) -> NCPoly:
        return self.scale(other)

    def scale(self, c) -> NCPoly:
        c = Fraction(c)
        return NCPoly.from_dict(self.alphabet, {w: c * x for w, x in self.terms})

    def __pow__(self, k: int) -> NCPoly:
        out = NCPoly.constant(self.alphabet, 1)
        for _ in range(k):
            out = out * self
        return out

    def reversed(self) -> NCPoly:
        return NCPoly.from_dict(self.alphabet, {w[::-1]: c for w, c in self.terms})

    def normalized(self) -> NCPoly:
        """Scale so the first term in length-then-lex order has coefficient 1."""
        if self.is_zero:
            return self
        return self.scale(1 / self.terms[0][1])

    def word_str(self, w: Word, sep: str = "*") -> str:
        return sep.join(self.alphabet.letters[i - 1] for i in w)

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for k, (w, c) in enumerate(self.terms):
            neg = c < 0
            a = -c if neg else c
            if not w:
                body = format_rat(a)
            elif a == 1:
                body = self.word_str(w)
            else:
                body = f"{format_rat(a)}*{self.word_str(w)}"
            if k == 0:
                parts.append(("-" if neg else "") + body)
            else:
                parts.append((" - " if neg else " + ") + body)
        return "".join(parts)
