"""Independent checks: power series expansion, Hankel ranks, matrix evaluation.

None of these use the block equations, so they can referee the minimizer.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

import flint

from .als import ALS, Alphabet
from .linalg import Mat, column_space_basis, invert_scalar, rank, vstack
from .poly import Word

__all__ = [
    "NotRegularError",
    "SeriesTable",
    "MatAssignment",
    "ProbEqResult",
    "series_coeffs",
    "hankel_rank",
    "hankel_rank_factored",
    "eval_matrices",
    "prob_eq",
    "random_assignment",
    "is_polynomial",
    "used_letters",
]


class NotRegularError(ValueError):
    """The constant coefficient matrix is singular, so no expansion at 0."""


@dataclass(frozen=True)
class SeriesTable:
    alphabet: Alphabet
    max_len: int
    coeffs: dict = field(default_factory=dict)   # word -> nonzero Fraction

    def __getitem__(self, w: Word) -> Fraction:
        if len(w) > self.max_len:
            raise KeyError(f"word {w} longer than the table")
        return self.coeffs.get(tuple(w), Fraction(0))

    def word_text(self, w: Word) -> str:
        if not w:
            return "1"
        sep = "" if all(len(x) == 1 for x in self.alphabet.letters) else "*"
        return sep.join(self.alphabet.letters[i - 1] for i in w)

    def dump(self, all_words: bool = False) -> str:
        """``word coefficient`` lines in length-then-lex order."""
        from .linalg import format_rat
        lines = []
        for w in _words(self.alphabet.d, self.max_len):
            c = self[w]
            if c or all_words:
                lines.append(f"{self.word_text(w)} {format_rat(c)}")
        return "\n".join(lines)


def _words(d: int, max_len: int, letters: Sequence[int] | None = None):
    letters = list(range(1, d + 1)) if letters is None else list(letters)
    for k in range(max_len + 1):
        yield from product(letters, repeat=k)


def used_letters(a: ALS) -> list[int]:
    return [i for i in range(1, a.alphabet.d + 1) if not a.coeffs[i].is_zero()]


def _regular_parts(a: ALS) -> tuple[list[Mat], Mat]:
    inv = invert_scalar(a.coeffs[0])
    if inv is None:
        raise NotRegularError("A0 is singular; normalize to a regular representation first")
    return [-(inv @ c) for c in a.coeffs[1:]], inv @ a.v


def series_coeffs(a: ALS, max_len: int) -> SeriesTable:
    """Coefficients ``u N_w A0^{-1} v`` of all words up to ``max_len``."""
    if a.n == 0:
        return SeriesTable(a.alphabet, max_len, {})
    ns, b = _regular_parts(a)
    letters = used_letters(a)
    out: dict = {}
    layer = {(): b}
    u = a.u
    for k in range(max_len + 1):
        for w, vec in layer.items():
            c = (u @ vec)[0, 0]
            if c:
                out[w] = c
        if k == max_len:
            break
        nxt = {}
        for w, vec in layer.items():
            if vec.is_zero():
                continue
            for ell in letters:
                nxt[(ell,) + w] = ns[ell - 1] @ vec
        layer = nxt
    return SeriesTable(a.alphabet, max_len, out)


def hankel_rank(s: SeriesTable, length: int) -> int:
    """Rank of ``(c_{pq})`` over words ``|p|, |q| <= length`` (brute force)."""
    if s.max_len < 2 * length:
        raise ValueError(f"table of length {s.max_len} cannot fill a Hankel block of {length}")
    letters = sorted({i for w in s.coeffs for i in w})
    words = list(_words(s.alphabet.d, length, letters))
    m = flint.fmpq_mat(len(words), len(words))
    for i, p in enumerate(words):
        for j, q in enumerate(words):
            c = s.coeffs.get(p + q)
            if c:
                m[i, j] = flint.fmpq(c.numerator, c.denominator)
    return m.rank() if words else 0


def hankel_rank_factored(a: ALS, length: int) -> int:
    """The same truncated Hankel rank, via ``H = O R`` with rows ``u N_p`` and
    columns ``N_q b``; avoids tabulating words of length ``2 * length``."""
    if a.n == 0:
        return 0
    ns, b = _regular_parts(a)
    letters = used_letters(a)
    cols = [b]
    rows = [a.u]
    layer_c, layer_r = [b], [a.u]
    for _ in range(length):
        layer_c = [ns[ell - 1] @ v for v in layer_c for ell in letters]
        layer_r = [r @ ns[ell - 1] for r in layer_r for ell in letters]
        # only spans matter; prune to bases to keep the layers small
        layer_c = _col_basis(layer_c)
        layer_r = [x.transpose() for x in _col_basis([r.transpose() for r in layer_r])]
        cols += layer_c
        rows += layer_r
    r_basis = column_space_basis(_hstack_list(cols, a.n))
    if r_basis.cols == 0:
        return 0
    o = vstack(*rows)
    return rank(o @ r_basis)


def _hstack_list(vs: list[Mat], n: int) -> Mat:
    from .linalg import hstack
    return hstack(*vs) if vs else Mat.zeros(n, 0)


def _col_basis(vs: list[Mat]) -> list[Mat]:
    if not vs:
        return []
    basis = column_space_basis(_hstack_list(vs, vs[0].rows))
    return [basis.submatrix(range(basis.rows), [j]) for j in range(basis.cols)]


@dataclass(frozen=True)
class MatAssignment:
    size: int
    mats: tuple[Mat, ...]    # one per letter

    def __post_init__(self):
        if any(m.shape != (self.size, self.size) for m in self.mats):
            raise ValueError("all assigned matrices must be size x size")


def random_assignment(d: int, size: int, rng: random.Random, bound: int = 10) -> MatAssignment:
    def entry():
        return Fraction(rng.randint(-bound, bound), rng.randint(1, bound))
    return MatAssignment(size, tuple(Mat(size, size, [entry() for _ in range(size * size)])
                                     for _ in range(d)))


def eval_matrices(a: ALS, x: MatAssignment) -> Mat | None:
    """``(u (x) I) A(X)^{-1} (v (x) I)`` or ``None`` where ``A(X)`` is singular."""
    N = x.size
    if len(x.mats) != a.alphabet.d:
        raise ValueError("assignment must give one matrix per letter")
    n = a.n
    if n == 0:
        return Mat.zeros(N, N)
    big = flint.fmpq_mat(n * N, n * N)
    for i in range(N):
        for p, q in a.coeffs[0].nonzero_positions():
            big[p * N + i, q * N + i] += a.coeffs[0].flint[p, q]
    for ell, xm in enumerate(x.mats, 1):
        c = a.coeffs[ell]
        xe = xm.flint
        for p, q in c.nonzero_positions():
            coef = c.flint[p, q]
            for i in range(N):
                for j in range(N):
                    if xe[i, j] != 0:
                        big[p * N + i, q * N + j] += coef * xe[i, j]
    if big.rank() < n * N:
        return None
    rhs = flint.fmpq_mat(n * N, N)
    for p in range(n):
        vp = a.v.flint[p, 0]
        if vp != 0:
            for i in range(N):
                rhs[p * N + i, i] = vp
    sol = big.solve(rhs)
    out = flint.fmpq_mat(N, N)
    for p in range(n):
        up = a.u.flint[0, p]
        if up != 0:
            for i in range(N):
                for j in range(N):
                    out[i, j] += up * sol[p * N + i, j]
    return Mat._wrap(out)


@dataclass(frozen=True)
class ProbEqResult:
    verdict: str                          # "equal" | "distinct" | "inconclusive"
    witness: MatAssignment | None = None
    defined_trials: int = 0
    singular_trials: int = 0

    def __bool__(self) -> bool:
        return self.verdict == "equal"


def prob_eq(a: ALS, b: ALS, trials: int = 20, sizes: Sequence[int] = (1, 2, 3),
            seed: int = 0, bound: int = 10) -> ProbEqResult:
    """Compare two systems at seeded random matrix points.

    ``distinct`` comes with a witness point where both are defined and differ
    (a proof); ``equal`` means every defined trial agreed; ``inconclusive``
    when more than half of the trials hit a singular point.
    """
    if a.alphabet != b.alphabet:
        raise ValueError("alphabet mismatch")
    rng = random.Random(seed)
    defined = singular = 0
    for t in range(trials):
        x = random_assignment(a.alphabet.d, sizes[t % len(sizes)], rng, bound)
        fa, fb = eval_matrices(a, x), eval_matrices(b, x)
        if fa is None or fb is None:
            singular += 1
            continue
        defined += 1
        if fa != fb:
            return ProbEqResult("distinct", x, defined, singular)
    if defined == 0 or singular * 2 > trials:
        return ProbEqResult("inconclusive", None, defined, singular)
    return ProbEqResult("equal", None, defined, singular)


def is_polynomial(a: ALS) -> bool:
    """For a minimal system: ``A0`` invertible and ``N^n = 0`` where
    ``N = I - A0^{-1} A`` (all length-``n`` products of the ``N_l`` vanish)."""
    n = a.n
    if n == 0:
        return True
    inv = invert_scalar(a.coeffs[0])
    if inv is None:
        return False
    ns = [inv @ c for c in a.coeffs[1:] if not c.is_zero()]
    # span of all products of length k, as flattened matrices
    span = [Mat.identity(n)]
    for _ in range(n):
        prods = [m @ p for p in span for m in ns]
        prods = [p for p in prods if not p.is_zero()]
        if not prods:
            return True
        flat = vstack(*[Mat.row(p.entries()) for p in prods])
        from .linalg import rref
        r, rk, _ = rref(flat)
        span = [Mat(n, n, r.submatrix([i], range(n * n)).entries()) for i in range(rk)]
    return all(p.is_zero() for p in span)
