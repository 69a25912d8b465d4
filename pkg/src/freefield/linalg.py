"""Exact dense linear algebra over the rationals.

Matrices are immutable values backed by FLINT's ``fmpq_mat``.  Entries are
exposed as :class:`fractions.Fraction`; internal code that needs speed can
reach the FLINT object through :attr:`Mat.flint` (never mutate it).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import flint

__all__ = [
    "Mat",
    "rref",
    "solve",
    "invert_scalar",
    "nullspace",
    "left_nullspace",
    "rank",
    "format_rat",
    "parse_rat",
    "to_fraction",
]


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, flint.fmpq):
        return Fraction(int(x.p), int(x.q))
    if isinstance(x, flint.fmpz):
        return Fraction(int(x))
    return Fraction(x)


def _fmpq(x) -> flint.fmpq:
    if isinstance(x, flint.fmpq):
        return x
    if isinstance(x, int):
        return flint.fmpq(x)
    f = to_fraction(x)
    return flint.fmpq(f.numerator, f.denominator)


def format_rat(x) -> str:
    """Render a rational as ``p/q``, or ``p`` when the denominator is 1."""
    f = to_fraction(x)
    if f.denominator == 1:
        return str(f.numerator)
    return f"{f.numerator}/{f.denominator}"


def parse_rat(text: str) -> Fraction:
    """Parse ``p``, ``-p`` or ``p/q``; raises ``ValueError`` otherwise."""
    t = text.strip()
    num, sep, den = t.partition("/")
    if not _is_int(num) or (sep and not _is_int(den, signed=False)):
        raise ValueError(f"not a rational number: {text!r}")
    if sep and int(den) == 0:
        raise ValueError(f"zero denominator: {text!r}")
    return Fraction(int(num), int(den) if sep else 1)


def _is_int(s: str, signed: bool = True) -> bool:
    if signed and s[:1] in "+-":
        s = s[1:]
    return s.isdigit() and s.isascii()


class Mat:
    """Immutable dense rational matrix."""

    __slots__ = ("_m",)

    def __init__(self, rows: int, cols: int, entries: Iterable = ()):
        entries = list(entries)
        if entries:
            if len(entries) != rows * cols:
                raise ValueError("entry count does not match shape")
            self._m = flint.fmpq_mat(rows, cols, [_fmpq(e) for e in entries])
        else:
            self._m = flint.fmpq_mat(rows, cols)

    @classmethod
    def _wrap(cls, m: flint.fmpq_mat) -> Mat:
        obj = cls.__new__(cls)
        obj._m = m
        return obj

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: int | None = None) -> Mat:
        r = len(rows)
        c = len(rows[0]) if r else (cols or 0)
        if any(len(row) != c for row in rows):
            raise ValueError("ragged rows")
        return cls(r, c, [e for row in rows for e in row])

    @classmethod
    def from_sparse(cls, rows: int, cols: int, items: Iterable[tuple[int, int, object]]) -> Mat:
        """Build from ``(i, j, value)`` triples; repeated positions accumulate."""
        m = flint.fmpq_mat(rows, cols)
        for i, j, x in items:
            if x:
                m[i, j] = m[i, j] + _fmpq(x)
        return cls._wrap(m)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> Mat:
        return cls._wrap(flint.fmpq_mat(rows, cols))

    @classmethod
    def identity(cls, n: int) -> Mat:
        m = flint.fmpq_mat(n, n)
        for i in range(n):
            m[i, i] = 1
        return cls._wrap(m)

    @classmethod
    def column(cls, values: Sequence) -> Mat:
        return cls(len(values), 1, values)

    @classmethod
    def row(cls, values: Sequence) -> Mat:
        return cls(1, len(values), values)

    @classmethod
    def unit_row(cls, n: int, i: int) -> Mat:
        m = flint.fmpq_mat(1, n)
        m[0, i] = 1
        return cls._wrap(m)

    @classmethod
    def unit_column(cls, n: int, i: int) -> Mat:
        m = flint.fmpq_mat(n, 1)
        m[i, 0] = 1
        return cls._wrap(m)

    @classmethod
    def reversal(cls, n: int) -> Mat:
        """The permutation matrix that reverses the order of rows/columns."""
        m = flint.fmpq_mat(n, n)
        for i in range(n):
            m[i, n - 1 - i] = 1
        return cls._wrap(m)

    @property
    def flint(self) -> flint.fmpq_mat:
        return self._m

    @property
    def rows(self) -> int:
        return self._m.nrows()

    @property
    def cols(self) -> int:
        return self._m.ncols()

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        return to_fraction(self._m[ij])

    def raw_entries(self) -> list:
        """Row-major list of FLINT rationals."""
        return self._m.entries()

    def entries(self) -> list[Fraction]:
        return [to_fraction(e) for e in self._m.entries()]

    def tolist(self) -> list[list[Fraction]]:
        e = self.entries()
        c = self.cols
        return [e[i * c:(i + 1) * c] for i in range(self.rows)]

    def __matmul__(self, other: Mat) -> Mat:
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        if self.rows == 0 or other.cols == 0 or self.cols == 0:
            return Mat.zeros(self.rows, other.cols)
        return Mat._wrap(self._m * other._m)

    def __add__(self, other: Mat) -> Mat:
        if self.shape != other.shape:
            raise ValueError("shape mismatch in addition")
        if self.rows == 0 or self.cols == 0:
            return self
        return Mat._wrap(self._m + other._m)

    def __sub__(self, other: Mat) -> Mat:
        if self.shape != other.shape:
            raise ValueError("shape mismatch in subtraction")
        if self.rows == 0 or self.cols == 0:
            return self
        return Mat._wrap(self._m - other._m)

    def __neg__(self) -> Mat:
        if self.rows == 0 or self.cols == 0:
            return self
        return Mat._wrap(-self._m)

    def scale(self, c) -> Mat:
        if self.rows == 0 or self.cols == 0:
            return self
        return Mat._wrap(self._m * _fmpq(c))

    def transpose(self) -> Mat:
        if self.rows == 0 or self.cols == 0:
            return Mat.zeros(self.cols, self.rows)
        return Mat._wrap(self._m.transpose())

    @property
    def T(self) -> Mat:
        return self.transpose()

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> Mat:
        e = self._m.entries()
        c = self.cols
        return Mat._wrap(flint.fmpq_mat(len(row_idx), len(col_idx),
                                        [e[i * c + j] for i in row_idx for j in col_idx]))

    def block(self, r0: int, r1: int, c0: int, c1: int) -> Mat:
        """Rows ``r0:r1`` and columns ``c0:c1``."""
        return self.submatrix(range(r0, r1), range(c0, c1))

    def is_zero(self) -> bool:
        return all(e == 0 for e in self._m.entries())

    def nonzero_positions(self) -> list[tuple[int, int]]:
        c = self.cols
        return [divmod(k, c) for k, e in enumerate(self._m.entries()) if e != 0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Mat):
            return NotImplemented
        return self.shape == other.shape and self._m.entries() == other._m.entries()

    def __hash__(self) -> int:
        return hash((self.shape, tuple(self._m.entries())))

    def __repr__(self) -> str:
        rows = "; ".join(" ".join(format_rat(x) for x in r) for r in self.tolist())
        return f"Mat({self.rows}x{self.cols}: {rows})"


def hstack(*mats: Mat) -> Mat:
    rows = mats[0].rows
    if any(m.rows != rows for m in mats):
        raise ValueError("hstack row mismatch")
    cols = sum(m.cols for m in mats)
    if rows == 0 or cols == 0:
        return Mat.zeros(rows, cols)
    parts = [(m.raw_entries(), m.cols) for m in mats]
    flat = [e for i in range(rows) for p, c in parts for e in p[i * c:(i + 1) * c]]
    return Mat._wrap(flint.fmpq_mat(rows, cols, flat))


def vstack(*mats: Mat) -> Mat:
    cols = mats[0].cols
    if any(m.cols != cols for m in mats):
        raise ValueError("vstack column mismatch")
    rows = sum(m.rows for m in mats)
    if rows == 0 or cols == 0:
        return Mat.zeros(rows, cols)
    return Mat._wrap(flint.fmpq_mat(rows, cols, [e for m in mats for e in m.raw_entries()]))


def block_matrix(blocks: Sequence[Sequence[Mat | None]], row_sizes: Sequence[int],
                 col_sizes: Sequence[int]) -> Mat:
    """Assemble a matrix from a grid of blocks; ``None`` stands for zero."""
    n, m = sum(row_sizes), sum(col_sizes)
    out = flint.fmpq_mat(n, m)
    r0 = 0
    for bi, rs in enumerate(row_sizes):
        c0 = 0
        for bj, cs in enumerate(col_sizes):
            b = blocks[bi][bj]
            if b is not None:
                if b.shape != (rs, cs):
                    raise ValueError(f"block ({bi},{bj}) has shape {b.shape}, expected {(rs, cs)}")
                e = b.raw_entries()
                for i in range(rs):
                    for j in range(cs):
                        x = e[i * cs + j]
                        if x != 0:
                            out[r0 + i, c0 + j] = x
            c0 += cs
        r0 += rs
    return Mat._wrap(out)


def _pivots(entries: list, rows: int, cols: int, rnk: int) -> list[int]:
    piv = []
    for i in range(rnk):
        base = i * cols
        for j in range(piv[-1] + 1 if piv else 0, cols):
            if entries[base + j] != 0:
                piv.append(j)
                break
    return piv


def rref(m: Mat) -> tuple[Mat, int, list[int]]:
    """Reduced row echelon form, rank and pivot columns."""
    if m.rows == 0 or m.cols == 0:
        return m, 0, []
    r, rnk = m.flint.rref()
    return Mat._wrap(r), rnk, _pivots(r.entries(), m.rows, m.cols, rnk)


def rank(m: Mat) -> int:
    if m.rows == 0 or m.cols == 0:
        return 0
    return m.flint.rank()


def _solve_flint(a: flint.fmpq_mat, b: flint.fmpq_mat):
    """Particular solution (free variables zero) and pivot data, or None."""
    n, k = a.ncols(), b.ncols()
    rows = a.nrows()
    aug = flint.fmpq_mat(rows, n + k)
    ae, be = a.entries(), b.entries()
    for i in range(rows):
        for j in range(n):
            x = ae[i * n + j]
            if x != 0:
                aug[i, j] = x
        for j in range(k):
            x = be[i * k + j]
            if x != 0:
                aug[i, n + j] = x
    r, rnk = aug.rref()
    e = r.entries()
    piv = _pivots(e, rows, n + k, rnk)
    if piv and piv[-1] >= n:
        return None
    w = n + k
    part = flint.fmpq_mat(n, k)
    for i, p in enumerate(piv):
        for j in range(k):
            x = e[i * w + n + j]
            if x != 0:
                part[p, j] = x
    return part, e, piv, w


def solve(m: Mat, rhs: Mat) -> tuple[Mat, list[Mat]] | None:
    """Solve ``m @ x = rhs`` exactly.

    Returns ``None`` when inconsistent, otherwise the particular solution with
    all free variables set to zero and a basis of the kernel of ``m``.
    """
    if rhs.rows != m.rows:
        raise ValueError("rhs row count must match the matrix")
    n = m.cols
    if m.rows == 0:
        return Mat.zeros(n, rhs.cols), [Mat.unit_column(n, j) for j in range(n)]
    if n == 0:
        return (Mat.zeros(0, rhs.cols), []) if rhs.is_zero() else None
    res = _solve_flint(m.flint, rhs.flint)
    if res is None:
        return None
    part, e, piv, w = res
    return Mat._wrap(part), _kernel_from_rref(e, piv, n, w)


def _kernel_from_rref(e: list, piv: list[int], n: int, w: int) -> list[Mat]:
    pivset = set(piv)
    basis = []
    for f in range(n):
        if f in pivset:
            continue
        vec = flint.fmpq_mat(n, 1)
        vec[f, 0] = 1
        for i, p in enumerate(piv):
            x = e[i * w + f]
            if x != 0:
                vec[p, 0] = -x
        basis.append(Mat._wrap(vec))
    return basis


def nullspace(m: Mat) -> list[Mat]:
    """Basis (columns) of the right kernel, in rref order."""
    n = m.cols
    if m.rows == 0 or n == 0:
        return [Mat.unit_column(n, j) for j in range(n)]
    r, rnk = m.flint.rref()
    e = r.entries()
    return _kernel_from_rref(e, _pivots(e, m.rows, n, rnk), n, n)


def left_nullspace(m: Mat) -> list[Mat]:
    """Basis (rows) of ``{p : p @ m = 0}``."""
    return [v.transpose() for v in nullspace(m.transpose())]


def invert_scalar(m: Mat) -> Mat | None:
    """Exact inverse of a square matrix, or ``None`` when singular."""
    if m.rows != m.cols:
        raise ValueError("invert_scalar needs a square matrix")
    if m.rows == 0:
        return m
    if m.flint.rank() < m.rows:
        return None
    return Mat._wrap(m.flint.inv())


def column_space_basis(m: Mat) -> Mat:
    """Reduced column-echelon basis of the column space, as columns."""
    r, rnk, _ = rref(m.transpose())
    return r.block(0, rnk, 0, r.cols).transpose() if rnk else Mat.zeros(m.rows, 0)
