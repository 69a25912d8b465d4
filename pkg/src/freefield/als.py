"""Admissible linear systems: data model, pivot blocks, transformations, text format.

An ALS ``(u, A, v)`` of dimension ``n`` over the letters ``x_1 .. x_d`` stores
the pencil ``A = A_0 + A_1 x_1 + ... + A_d x_d`` as ``d + 1`` scalar matrices.
It represents ``f = u A^{-1} v``; with ``u = e_1`` the element ``f`` is the
first component of the solution ``s`` of ``A s = v``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Sequence

from .linalg import Mat, format_rat, invert_scalar, parse_rat

__all__ = [
    "Alphabet",
    "Pencil",
    "ALS",
    "ExtendedALS",
    "PivotStructure",
    "Transformation",
    "Diagnostics",
    "ALSFormatError",
    "validate",
    "pivot_structure",
    "apply_transformation",
    "extend",
    "restrict",
    "mirror",
    "serialize",
    "parse_als",
    "empty_als",
]


class ALSFormatError(ValueError):
    """Malformed ALS text; carries the 1-based line and column."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Alphabet:
    letters: tuple[str, ...]

    def __post_init__(self):
        if not self.letters:
            raise ValueError("alphabet must be nonempty")
        if len(set(self.letters)) != len(self.letters):
            raise ValueError("alphabet letters must be distinct")
        for name in self.letters:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name) or name == "inv":
                raise ValueError(f"invalid letter name {name!r}")

    @classmethod
    def of(cls, letters: str | Sequence[str]) -> Alphabet:
        if isinstance(letters, str):
            letters = [t for t in re.split(r"[,\s]+", letters) if t]
        return cls(tuple(letters))

    @property
    def d(self) -> int:
        return len(self.letters)

    def index(self, letter: str) -> int:
        """Position of a letter, 1-based to match the coefficient index."""
        return self.letters.index(letter) + 1

    def __iter__(self):
        return iter(self.letters)

    def __str__(self) -> str:
        return ",".join(self.letters)


XYZ = Alphabet(("x", "y", "z"))


@dataclass(frozen=True)
class Pencil:
    alphabet: Alphabet
    coeffs: tuple[Mat, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.alphabet.d + 1:
            raise ValueError("a pencil needs one coefficient matrix per letter plus A0")
        n = self.coeffs[0].rows
        if any(c.shape != (n, n) for c in self.coeffs):
            raise ValueError("pencil coefficients must be square of equal size")

    @property
    def n(self) -> int:
        return self.coeffs[0].rows

    def entry(self, i: int, j: int) -> tuple[Fraction, ...]:
        return tuple(c[i, j] for c in self.coeffs)


@dataclass(frozen=True, eq=False)
class ALS:
    """A linear representation ``(u, A, v)``; admissible when ``u = e_1``.

    ``labels`` optionally tags every row/column index with a provenance
    marker that survives transformations and is dropped with removed indices.
    """

    u: Mat
    pencil: Pencil
    v: Mat
    labels: tuple[Hashable, ...] | None = field(default=None)

    def __post_init__(self):
        n = self.pencil.n
        if self.u.shape != (1, n) or self.v.shape != (n, 1):
            raise ValueError(f"u must be 1x{n} and v must be {n}x1")
        if self.labels is not None and len(self.labels) != n:
            raise ValueError("one label per index is required")

    @classmethod
    def build(cls, alphabet: Alphabet, coeffs: Sequence[Mat], v: Mat,
              u: Mat | None = None, labels=None) -> ALS:
        n = coeffs[0].rows
        if u is None:
            u = Mat.unit_row(n, 0) if n else Mat.zeros(1, 0)
        return cls(u, Pencil(alphabet, tuple(coeffs)), v,
                   tuple(labels) if labels is not None else None)

    @property
    def n(self) -> int:
        return self.pencil.n

    @property
    def alphabet(self) -> Alphabet:
        return self.pencil.alphabet

    @property
    def coeffs(self) -> tuple[Mat, ...]:
        return self.pencil.coeffs

    @property
    def is_empty(self) -> bool:
        return self.n == 0

    @property
    def is_admissible(self) -> bool:
        return self.n == 0 or self.u == Mat.unit_row(self.n, 0)

    def replace(self, *, u=None, coeffs=None, v=None, labels=...) -> ALS:
        coeffs = self.coeffs if coeffs is None else tuple(coeffs)
        return ALS(self.u if u is None else u, Pencil(self.alphabet, coeffs),
                   self.v if v is None else v,
                   self.labels if labels is ... else labels)

    def without(self, indices: Sequence[int]) -> ALS:
        """Drop the given rows and columns (no equivalence implied)."""
        drop = set(indices)
        keep = [i for i in range(self.n) if i not in drop]
        return ALS(self.u.submatrix([0], keep),
                   Pencil(self.alphabet, tuple(c.submatrix(keep, keep) for c in self.coeffs)),
                   self.v.submatrix(keep, [0]),
                   tuple(self.labels[i] for i in keep) if self.labels is not None else None)

    def pencil_at(self, i: int, j: int) -> tuple[Fraction, ...]:
        return self.pencil.entry(i, j)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ALS):
            return NotImplemented
        return (self.alphabet == other.alphabet and self.u == other.u
                and self.v == other.v and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.alphabet, self.u, self.v, self.coeffs))

    def __repr__(self) -> str:
        return f"ALS(dim={self.n}, letters={self.alphabet})"

    def __str__(self) -> str:
        return serialize(self)


def empty_als(alphabet: Alphabet) -> ALS:
    """The dimension-0 system, the minimal representation of 0."""
    z = Mat.zeros(0, 0)
    return ALS.build(alphabet, [z] * (alphabet.d + 1), Mat.zeros(0, 1), u=Mat.zeros(1, 0))


@dataclass(frozen=True)
class ExtendedALS:
    """An ALS with an extra scalar row/column at index 0.

    Row 0 reads ``s_0 - s_1 = 0`` right after :func:`extend`; only admissible
    column operations touch it afterwards, so it stays scalar.
    """

    base: ALS

    @property
    def n(self) -> int:
        return self.base.n - 1


@dataclass(frozen=True)
class PivotStructure:
    sizes: tuple[int, ...]

    @property
    def m(self) -> int:
        return len(self.sizes)

    @property
    def starts(self) -> tuple[int, ...]:
        out, acc = [], 0
        for s in self.sizes:
            out.append(acc)
            acc += s
        return tuple(out)

    @property
    def cuts(self) -> tuple[int, ...]:
        """Prefix sums at the block boundaries (excluding 0 and n)."""
        return self.starts[1:]

    def block_range(self, k: int) -> range:
        """Index range of block ``k`` (1-based block index)."""
        start = self.starts[k - 1]
        return range(start, start + self.sizes[k - 1])


@dataclass(frozen=True)
class Transformation:
    p: Mat
    q: Mat

    @property
    def admissible(self) -> bool:
        n = self.q.rows
        return n == 0 or self.q.submatrix([0], range(n)) == Mat.unit_row(n, 0)


@dataclass
class Diagnostics:
    ok: bool
    represents_zero: bool
    messages: list[str]


def validate(a: ALS) -> Diagnostics:
    """Shape and admissibility checks; fullness of the pencil is not proven here."""
    msgs = []
    n = a.n
    if a.u.shape != (1, n):
        msgs.append(f"u has shape {a.u.shape}, expected (1, {n})")
    if a.v.shape != (n, 1):
        msgs.append(f"v has shape {a.v.shape}, expected ({n}, 1)")
    for idx, c in enumerate(a.coeffs):
        if c.shape != (n, n):
            msgs.append(f"coefficient {idx} has shape {c.shape}, expected ({n}, {n})")
    if n and a.u.shape == (1, n) and not a.is_admissible:
        msgs.append("admissibility violated: u is not e_1")
    return Diagnostics(not msgs, n == 0, msgs)


def _lowest_nonzero_rows(a: ALS) -> list[int]:
    """For each column the largest row index holding a nonzero coefficient, or -1."""
    n = a.n
    low = [-1] * n
    for c in a.coeffs:
        for i, j in c.nonzero_positions():
            if i > low[j]:
                low[j] = i
    return low


def pivot_structure(a: ALS) -> PivotStructure:
    """Maximal block upper triangular decomposition of the pencil."""
    n = a.n
    if n == 0:
        raise ValueError("pivot structure of the empty system is undefined")
    low = _lowest_nonzero_rows(a)
    sizes, start, reach = [], 0, -1
    for c in range(1, n + 1):
        reach = max(reach, low[c - 1])
        # cut after column c-1 iff nothing in columns < c reaches row >= c
        if c == n or reach < c:
            sizes.append(c - start)
            start = c
    return PivotStructure(tuple(sizes))


def cut_witness(a: ALS, c: int) -> tuple[int, int, int] | None:
    """A nonzero entry (coeff index, row, col) with row >= c > col, if any."""
    for idx, m in enumerate(a.coeffs):
        for i, j in m.nonzero_positions():
            if i >= c > j:
                return idx, i, j
    return None


def apply_transformation(a: ALS, t: Transformation, *, check: bool = True) -> ALS:
    """The system ``(uQ, PAQ, Pv)``."""
    if check:
        if not t.admissible:
            raise ValueError("transformation is not admissible")
        if invert_scalar(t.p) is None or invert_scalar(t.q) is None:
            raise ValueError("transformation matrices must be invertible")
    if t.p.shape != (a.n, a.n) or t.q.shape != (a.n, a.n):
        raise ValueError("transformation dimension mismatch")
    return a.replace(u=a.u @ t.q, coeffs=[t.p @ c @ t.q for c in a.coeffs], v=t.p @ a.v)


def extend(a: ALS) -> ExtendedALS:
    """Prepend the scalar row/column 0 with row ``[1, -1, 0, ..., 0]``."""
    if a.n == 0:
        raise ValueError("cannot extend the empty system")
    n = a.n
    coeffs = []
    for idx, c in enumerate(a.coeffs):
        rows = [[Fraction(0)] * (n + 1)]
        if idx == 0:
            rows[0][0], rows[0][1] = Fraction(1), Fraction(-1)
        rows += [[Fraction(0)] + r for r in c.tolist()]
        coeffs.append(Mat.from_rows(rows))
    v = Mat.column([0] + a.v.entries())
    labels = (("ext",) + a.labels) if a.labels is not None else None
    return ExtendedALS(ALS.build(a.alphabet, coeffs, v, labels=labels))


def restrict(e: ExtendedALS) -> ALS:
    """Eliminate row/column 0 again, returning an equivalent admissible system.

    Row 0 reads ``a00 s_0 + c s' = 0``, so ``f = s_0 = -(c/a00) s'``.  A column
    transformation replacing the lowest-index variable with ``c_j != 0`` by
    ``f`` makes the remaining system admissible.  ``c = 0`` means ``f = 0``.
    """
    b = e.base
    n = b.n - 1
    for idx, c in enumerate(b.coeffs):
        row0 = c.submatrix([0], range(n + 1))
        if idx > 0 and not row0.is_zero():
            raise ValueError("row 0 of an extended system must be scalar")
        col0 = c.submatrix(range(1, n + 1), [0])
        if not col0.is_zero():
            raise ValueError("column 0 has entries below row 0; cannot restrict")
    if b.v[0, 0] != 0:
        raise ValueError("extended right hand side must vanish at index 0")
    a00 = b.coeffs[0][0, 0]
    if a00 == 0:
        raise ValueError("entry (0,0) of an extended system must be nonzero")
    idx = list(range(1, n + 1))
    inner = ALS.build(b.alphabet, [c.submatrix(idx, idx) for c in b.coeffs],
                      b.v.submatrix(idx, [0]),
                      labels=b.labels[1:] if b.labels is not None else None)
    if n == 0:
        return inner
    crow = [-x / a00 for x in b.coeffs[0].submatrix([0], idx).entries()]
    nz = [j for j, x in enumerate(crow) if x != 0]
    if not nz:
        return empty_als(b.alphabet)
    j = nz[0]
    rows = [crow] + [[Fraction(int(i == r)) for r in range(n)] for i in range(n) if i != j]
    m = Mat.from_rows(rows)
    qinv = invert_scalar(m)
    return inner.replace(u=Mat.unit_row(n, 0), coeffs=[c @ qinv for c in inner.coeffs])


def admissible_from_row(u: Mat) -> Mat:
    """An admissible-making column transformation ``Q`` with ``u Q = e_1``.

    The lowest-index nonzero entry of ``u`` becomes the pivot.
    """
    n = u.cols
    ent = u.entries()
    nz = [j for j, x in enumerate(ent) if x != 0]
    if not nz:
        raise ValueError("u is zero")
    j = nz[0]
    rows = [ent] + [[Fraction(int(i == r)) for r in range(n)] for i in range(n) if i != j]
    return invert_scalar(Mat.from_rows(rows))


def mirror(a: ALS) -> ALS:
    """System for the reversed element (every word read backwards)."""
    if a.n == 0:
        return a
    n = a.n
    sig = Mat.reversal(n)
    u = a.v.transpose() @ sig
    coeffs = [sig @ c.transpose() @ sig for c in a.coeffs]
    v = sig @ a.u.transpose()
    labels = tuple(reversed(a.labels)) if a.labels is not None else None
    out = ALS.build(a.alphabet, coeffs, v, u=u, labels=labels)
    if u.is_zero():
        # v = 0 represents zero; keep an admissible but trivially zero system
        return empty_als(a.alphabet)
    q = admissible_from_row(u)
    return out.replace(u=u @ q, coeffs=[c @ q for c in coeffs])


def serialize(a: ALS) -> str:
    n = a.n
    lines = ["ALS 1", "letters: " + " ".join(a.alphabet.letters), f"dim: {n}"]
    lines.append(("u: " + " ".join(format_rat(x) for x in a.u.entries())).rstrip())
    lines.append(("v: " + " ".join(format_rat(x) for x in a.v.entries())).rstrip())
    names = ["A0:"] + [f"A[{x}]:" for x in a.alphabet.letters]
    for name, c in zip(names, a.coeffs):
        lines.append(name)
        lines.extend(" ".join(format_rat(x) for x in row) for row in c.tolist())
    return "\n".join(lines) + "\n"


def parse_als(text: str) -> ALS:
    """Parse the line-oriented ALS text format; ``#`` starts a comment."""
    lines = []
    for no, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].rstrip()
        if body.strip():
            lines.append((no, body))
    pos = 0
    last_line = len(text.splitlines()) + 1

    def take(what: str):
        nonlocal pos
        if pos >= len(lines):
            raise ALSFormatError(f"unexpected end of input, expected {what}", last_line)
        item = lines[pos]
        pos += 1
        return item

    def keyed(key: str):
        no, body = take(f"'{key}'")
        stripped = body.lstrip()
        col = len(body) - len(stripped) + 1
        if not stripped.startswith(key):
            raise ALSFormatError(f"expected '{key}'", no, col)
        return no, col + len(key), stripped[len(key):]

    def rats(no: int, col0: int, rest: str, count: int) -> list[Fraction]:
        out = []
        for m in re.finditer(r"\S+", rest):
            try:
                out.append(parse_rat(m.group()))
            except ValueError:
                raise ALSFormatError(f"bad rational {m.group()!r}", no, col0 + m.start()) from None
        if len(out) != count:
            raise ALSFormatError(f"expected {count} entries, found {len(out)}", no, col0)
        return out

    no, col, rest = keyed("ALS")
    if rest.strip() != "1":
        raise ALSFormatError("unsupported format version", no, col + 1)
    no, col, rest = keyed("letters:")
    try:
        alphabet = Alphabet.of(rest.split())
    except ValueError as exc:
        raise ALSFormatError(str(exc), no, col) from None
    no, col, rest = keyed("dim:")
    if not rest.strip().isdigit():
        raise ALSFormatError("dimension must be a nonnegative integer", no, col + 1)
    n = int(rest.strip())
    no, col, rest = keyed("u:")
    u = rats(no, col, rest, n)
    no, col, rest = keyed("v:")
    v = rats(no, col, rest, n)
    coeffs = []
    names = ["A0:"] + [f"A[{x}]:" for x in alphabet.letters]
    for name in names:
        keyed(name)
        rows = []
        for _ in range(n):
            no, body = take(f"a row of {name[:-1]}")
            rows.append(rats(no, 1, body, n))
        coeffs.append(Mat(n, n, [e for r in rows for e in r]))
    if pos < len(lines):
        no, body = lines[pos]
        raise ALSFormatError("trailing content", no)
    return ALS.build(alphabet, coeffs, Mat(n, 1, v), u=Mat(1, n, u))


_TERM = re.compile(r"([+-]?)\s*(\d+(?:/\d+)?)?\s*\*?\s*([A-Za-z_][A-Za-z0-9_]*)?")


def parse_linear_form(text: str, alphabet: Alphabet) -> tuple[Fraction, ...]:
    """Coefficients ``(c_0, c_1, .., c_d)`` of an affine form like ``2x-1/3``.

    ``.`` and the empty string mean zero.
    """
    s = text.replace(" ", "")
    out = [Fraction(0)] * (alphabet.d + 1)
    if s in ("", "."):
        return tuple(out)
    pos = 0
    while pos < len(s):
        m = _TERM.match(s, pos)
        if not m or m.end() == pos or not (m.group(2) or m.group(3)):
            raise ValueError(f"bad linear form {text!r}")
        sign = -1 if m.group(1) == "-" else 1
        c = parse_rat(m.group(2)) if m.group(2) else Fraction(1)
        if m.group(3):
            out[alphabet.index(m.group(3))] += sign * c
        else:
            out[0] += sign * c
        pos = m.end()
        if pos < len(s) and s[pos] not in "+-":
            raise ValueError(f"bad linear form {text!r}")
    return tuple(out)


def als_from_rows(rows: Sequence[Sequence[str]], v: Sequence, alphabet: Alphabet | str = XYZ,
                  u: Sequence | None = None) -> ALS:
    """Build a system from a matrix of affine forms, e.g. ``[["x", "-1"], [".", "1"]]``."""
    if isinstance(alphabet, str):
        alphabet = Alphabet.of(alphabet)
    n = len(rows)
    forms = [[parse_linear_form(str(e), alphabet) for e in r] for r in rows]
    if any(len(r) != n for r in forms):
        raise ValueError("system matrix must be square")
    coeffs = [Mat(n, n, [forms[i][j][k] for i in range(n) for j in range(n)])
              for k in range(alphabet.d + 1)]
    vv = Mat.column([parse_rat(str(x)) if str(x) != "." else 0 for x in v])
    uu = Mat.row([parse_rat(str(x)) for x in u]) if u is not None else None
    return ALS.build(alphabet, coeffs, vv, u=uu)
