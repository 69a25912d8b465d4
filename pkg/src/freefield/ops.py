"""Rational operations on admissible linear systems.

Constructions for monomials, polynomials, sums, products (generic and the two
typed variants of dimension ``n_f + n_g - 1``), inverses (generic and the four
type-dependent minimal ones), plus element type detection and the normal
forms the typed constructions require.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .als import ALS, Alphabet, Transformation, apply_transformation, empty_als
from .linalg import (Mat, block_matrix, hstack, invert_scalar, left_nullspace, nullspace,
                     vstack)
from .poly import NCPoly, Word

__all__ = [
    "ElementType",
    "TypedFormError",
    "monomial_als",
    "poly_als",
    "scalar_als",
    "scalar_mul",
    "add",
    "mul",
    "invert",
    "detect_type",
    "normal_form",
    "normalize_regular",
    "scalar_value",
]


class TypedFormError(ValueError):
    """The normal form a typed construction needs could not be established."""


class DivisionByZero(ZeroDivisionError):
    def __init__(self, msg: str = "division by zero element"):
        super().__init__(msg)


@dataclass(frozen=True)
class ElementType:
    one_in_L: bool
    one_in_R: bool
    left_witness: Mat | None = None   # row p with p A_l = 0 for all letters
    right_witness: Mat | None = None  # column q with A_l q = 0 for all letters

    @property
    def pair(self) -> tuple[int, int]:
        """The type written ``(i, j)``: ``i`` for ``1 in R``, ``j`` for ``1 in L``."""
        return int(self.one_in_R), int(self.one_in_L)


def _labels(*parts):
    if any(p is None for p in parts):
        return None
    out = ()
    for p in parts:
        out += tuple(p)
    return out


def scalar_als(alphabet: Alphabet, c) -> ALS:
    c = Fraction(c)
    if c == 0:
        return empty_als(alphabet)
    one = Mat.identity(1)
    return ALS.build(alphabet, [one] + [Mat.zeros(1, 1)] * alphabet.d, Mat.column([c]))


def monomial_als(alphabet: Alphabet, word: Word, c=1) -> ALS:
    """The bidiagonal polynomial system of dimension ``len(word) + 1``."""
    k = len(word)
    n = k + 1
    coeffs = [Mat.identity(n)]
    for letter in range(1, alphabet.d + 1):
        rows = [[0] * n for _ in range(n)]
        for i, w in enumerate(word):
            if w == letter:
                rows[i][i + 1] = -1
        coeffs.append(Mat.from_rows(rows))
    v = [0] * k + [Fraction(c)]
    if Fraction(c) == 0:
        return empty_als(alphabet)
    return ALS.build(alphabet, coeffs, Mat.column(v))


def poly_als(p: NCPoly) -> ALS:
    """A polynomial (upper unitriangular) system built over the suffixes of ``p``.

    Row 1 reads ``s_1 = sum_w c_w a_1(w) s_{tail(w)} + c_eps``; every proper
    nonempty suffix ``b w'`` gets a row ``s - b s_{w'} = 0``.  Linear terms and
    the constant land directly in the last column of row 1.
    """
    alphabet = p.alphabet
    if p.is_zero:
        return empty_als(alphabet)
    if p.is_constant:
        return scalar_als(alphabet, p.coeff(()))
    suffixes = set()
    for w, _ in p.terms:
        for i in range(1, len(w)):
            suffixes.add(w[i:])
    order = sorted(suffixes, key=lambda s: (-len(s), s))
    n = len(order) + 2
    pos = {s: i + 1 for i, s in enumerate(order)}
    pos[()] = n - 1
    mats = [[[Fraction(0)] * n for _ in range(n)] for _ in range(alphabet.d + 1)]
    for i in range(n):
        mats[0][i][i] = Fraction(1)
    for w, c in p.terms:
        if not w:
            mats[0][0][n - 1] -= c
        else:
            mats[w[0]][0][pos[w[1:]]] -= c
    for s in order:
        mats[s[0]][pos[s]][pos[s[1:]]] -= 1
    v = [0] * (n - 1) + [1]
    return ALS.build(alphabet, [Mat.from_rows(m) for m in mats], Mat.column(v))


def scalar_value(a: ALS) -> Fraction | None:
    """The value if ``a`` is visibly a constant (dimension <= 1, no letters)."""
    if a.n == 0:
        return Fraction(0)
    if a.n == 1 and all(c.is_zero() for c in a.coeffs[1:]) and a.coeffs[0][0, 0] != 0:
        return a.v[0, 0] / a.coeffs[0][0, 0]
    return None


def scalar_mul(a: ALS, mu) -> ALS:
    mu = Fraction(mu)
    if mu == 0 or a.n == 0:
        return empty_als(a.alphabet)
    return a.replace(v=a.v.scale(mu))


def add(f: ALS, g: ALS) -> ALS:
    """Block system ``[[A_f, -A_f u_f^T u_g], [., A_g]]`` of dimension ``n_f + n_g``."""
    if f.alphabet != g.alphabet:
        raise ValueError("alphabet mismatch")
    if f.n == 0:
        return g
    if g.n == 0:
        return f
    nf, ng = f.n, g.n
    coeffs = []
    for af, ag in zip(f.coeffs, g.coeffs):
        coupling = -(af @ f.u.transpose() @ g.u)
        coeffs.append(block_matrix([[af, coupling], [None, ag]], [nf, ng], [nf, ng]))
    u = hstack(f.u, Mat.zeros(1, ng))
    return ALS.build(f.alphabet, coeffs, vstack(f.v, g.v), u=u,
                     labels=_labels(f.labels, g.labels))


def _mul_generic(f: ALS, g: ALS) -> ALS:
    nf, ng = f.n, g.n
    coeffs = []
    for idx, (af, ag) in enumerate(zip(f.coeffs, g.coeffs)):
        coupling = -(f.v @ g.u) if idx == 0 else None
        coeffs.append(block_matrix([[af, coupling], [None, ag]], [nf, ng], [nf, ng]))
    u = hstack(f.u, Mat.zeros(1, ng))
    return ALS.build(f.alphabet, coeffs, vstack(Mat.zeros(nf, 1), g.v), u=u,
                     labels=_labels(f.labels, g.labels))


def _has_last_row_form(f: ALS) -> bool:
    n = f.n
    if n < 1:
        return False
    last = n - 1
    if f.coeffs[0].submatrix([last], range(n)) != Mat.unit_row(n, last):
        return False
    if any(not c.submatrix([last], range(n)).is_zero() for c in f.coeffs[1:]):
        return False
    return f.v.submatrix(range(last), [0]).is_zero()


def _has_first_col_form(g: ALS) -> bool:
    n = g.n
    if n < 1:
        return False
    if g.coeffs[0].submatrix(range(n), [0]) != Mat.unit_column(n, 0):
        return False
    if any(not c.submatrix(range(n), [0]).is_zero() for c in g.coeffs[1:]):
        return False
    return g.v[0, 0] == 0


def _mul_last_row(f: ALS, g: ALS) -> ALS:
    """Product when ``f`` has last row ``[0 .. 0 1]`` and ``v_f = lambda e_n``."""
    nf, ng = f.n, g.n
    lam = f.v[nf - 1, 0]
    top = range(nf - 1)
    coeffs = []
    for af, ag in zip(f.coeffs, g.coeffs):
        head = af.submatrix(top, top)
        col = af.submatrix(top, [nf - 1]).scale(lam)
        coupling = col @ g.u
        coeffs.append(block_matrix([[head, coupling], [None, ag]], [nf - 1, ng], [nf - 1, ng]))
    u = hstack(f.u.submatrix([0], top), Mat.zeros(1, ng)) if nf > 1 else g.u
    labels = _labels(f.labels[:-1] if f.labels is not None else None, g.labels)
    return ALS.build(f.alphabet, coeffs, vstack(Mat.zeros(nf - 1, 1), g.v), u=u, labels=labels)


def _mul_first_col(f: ALS, g: ALS) -> ALS:
    """Product when ``g`` has first column ``e_1`` and ``v_f = lambda e_n``."""
    nf, ng = f.n, g.n
    lam = f.v[nf - 1, 0]
    rest = range(1, ng)
    en = Mat.unit_column(nf, nf - 1)
    coeffs = []
    for af, ag in zip(f.coeffs, g.coeffs):
        coupling = (en @ ag.submatrix([0], rest)).scale(lam)
        coeffs.append(block_matrix([[af, coupling], [None, ag.submatrix(rest, rest)]],
                                   [nf, ng - 1], [nf, ng - 1]))
    labels = _labels(f.labels, g.labels[1:] if g.labels is not None else None)
    v = vstack(Mat.zeros(nf, 1), g.v.submatrix(rest, [0]))
    return ALS.build(f.alphabet, coeffs, v, u=hstack(f.u, Mat.zeros(1, ng - 1)), labels=labels)


def _letter_stack_h(a: ALS) -> Mat:
    return hstack(*a.coeffs[1:])


def _letter_stack_v(a: ALS) -> Mat:
    return vstack(*a.coeffs[1:])


def detect_type(f: ALS) -> ElementType:
    """Whether ``1`` lies in the left / right span, via two kernel computations.

    ``1 in L`` iff some row ``p`` kills every letter coefficient while
    ``p A_0 != 0``; ``1 in R`` iff some column ``q`` kills every letter
    coefficient while ``A_0 q != 0``.  Meaningful for minimal systems.
    """
    if f.n == 0:
        raise ValueError("type of the zero element is undefined")
    a0 = f.coeffs[0]
    lw = next((p for p in left_nullspace(_letter_stack_h(f)) if not (p @ a0).is_zero()), None)
    rw = next((q for q in nullspace(_letter_stack_v(f)) if not (a0 @ q).is_zero()), None)
    return ElementType(lw is not None, rw is not None, lw, rw)


def _complete_columns(cols: list[Mat], n: int, last: Mat | None = None) -> Mat:
    """Extend independent columns by unit vectors (lowest index first)."""
    chosen = list(cols)
    tail = [last] if last is not None else []
    for j in range(n):
        if len(chosen) + len(tail) == n:
            break
        trial = hstack(*(chosen + [Mat.unit_column(n, j)] + tail))
        if _col_rank(trial) == trial.cols:
            chosen.append(Mat.unit_column(n, j))
    out = hstack(*(chosen + tail))
    if out.cols != n or _col_rank(out) != n:
        raise TypedFormError("could not complete a basis")
    return out


def _col_rank(m: Mat) -> int:
    from .linalg import rank
    return rank(m)


def normal_form(f: ALS, first_col: bool, last_row: bool) -> ALS:
    """Admissibly transform ``f`` so that ``v = lambda e_n`` and optionally the
    first column is ``e_1`` (needs ``1 in R``) and/or the last row is
    ``[0 .. 0 1]`` (needs ``1 in L``).  Raises :class:`TypedFormError`.
    """
    n = f.n
    if n == 0:
        raise TypedFormError("empty system")
    if (first_col or last_row) and n < 2:
        raise TypedFormError("typed normal forms need dimension >= 2")
    a0, v = f.coeffs[0], f.v
    if v.is_zero():
        raise TypedFormError("right hand side is zero")
    q = w = p = None
    if first_col:
        q = next((c for c in nullspace(_letter_stack_v(f)) if c[0, 0] != 0), None)
        if q is None:
            raise TypedFormError("1 is not in the right span")
        q = q.scale(1 / q[0, 0])
        w = a0 @ q
    if last_row:
        p = next((r for r in left_nullspace(_letter_stack_h(f)) if (r @ v)[0, 0] != 0), None)
        if p is None:
            raise TypedFormError("1 is not in the left span")
    # row transformation P
    if first_col and last_row:
        if (p @ w)[0, 0] != 0:
            raise TypedFormError("first column and last row forms are incompatible")
        ker = left_nullspace(p.transpose())  # rows r with r p^T = 0 -> use columns
        kcols = [k.transpose() for k in ker]
        mid = _extend_within([w], kcols, n - 2)
        pinv = hstack(w, *mid, v)
    elif first_col:
        pinv = _complete_columns([w], n, last=v)
    elif last_row:
        perp = left_nullspace(v)
        pmat = vstack(*perp, p) if perp else p
        pinv = invert_scalar(pmat)
    else:
        pinv = _complete_columns([], n, last=v)
    if pinv is None or invert_scalar(pinv) is None:
        raise TypedFormError("singular row transformation")
    pmat = invert_scalar(pinv)
    # column transformation Q (first row e_1)
    if last_row:
        r = (pmat @ a0).submatrix([n - 1], range(n))
        if first_col:
            col0 = q
        else:
            j = next((j for j in range(1, n) if r[0, j] != 0), None)
            if j is None:
                raise TypedFormError("last row is proportional to e_1")
            ent = [Fraction(0)] * n
            ent[0] = Fraction(1)
            ent[j] = -r[0, 0] / r[0, j]
            col0 = Mat.column(ent)
        mids = nullspace(vstack(Mat.unit_row(n, 0), r))
        j = next((j for j in range(1, n) if r[0, j] != 0), None)
        if j is None:
            raise TypedFormError("last row is proportional to e_1")
        lastc = Mat.unit_column(n, j).scale(1 / r[0, j])
        qmat = hstack(col0, *mids, lastc)
    elif first_col:
        qmat = hstack(q, *[Mat.unit_column(n, j) for j in range(1, n)])
    else:
        qmat = Mat.identity(n)
    t = Transformation(pmat, qmat)
    if not t.admissible or invert_scalar(qmat) is None:
        raise TypedFormError("column transformation is not admissible")
    out = apply_transformation(f, t, check=False)
    if first_col and not _has_first_col_form(out):
        raise TypedFormError("first column form not reached")
    if last_row and not _has_last_row_form(out):
        raise TypedFormError("last row form not reached")
    if not out.v.submatrix(range(n - 1), [0]).is_zero():
        raise TypedFormError("right hand side form not reached")
    return out


def _extend_within(start: list[Mat], pool: list[Mat], count: int) -> list[Mat]:
    """Pick ``count`` vectors from ``pool`` independent of ``start`` and each other."""
    chosen: list[Mat] = []
    for c in pool:
        if len(chosen) == count:
            break
        trial = hstack(*(start + chosen + [c]))
        if _col_rank(trial) == trial.cols:
            chosen.append(c)
    if len(chosen) != count:
        raise TypedFormError("could not extend basis inside the kernel")
    return chosen


def mul(f: ALS, g: ALS, strategy: str = "auto") -> ALS:
    """Product ``f g``.

    ``strategy``: ``generic`` (dimension ``n_f + n_g``), ``last-row`` (needs
    ``1 in L(f)``), ``first-col`` (needs ``1 in R(g)``) or ``auto``.  The
    typed variants have dimension ``n_f + n_g - 1``.
    """
    if f.alphabet != g.alphabet:
        raise ValueError("alphabet mismatch")
    strategy = _STRATEGY_ALIASES.get(strategy, strategy)
    if f.n == 0 or g.n == 0:
        return empty_als(f.alphabet)
    if strategy == "generic":
        return _mul_generic(f, g)
    cf, cg = scalar_value(f), scalar_value(g)
    if strategy == "auto" and (cf is not None or cg is not None):
        if cf is not None:
            return scalar_mul(g, cf)
        return scalar_mul(_normal_v(f), cg)
    if strategy == "last-row":
        return _mul_last_row(_ensure(f, last_row=True), g)
    if strategy == "first-col":
        return _mul_first_col(_normal_v(f), _ensure(g, first_col=True))
    if strategy != "auto":
        raise ValueError(f"unknown multiplication strategy {strategy!r}")
    options = []
    try:
        g2 = _ensure(g, first_col=True)
        options.append((0 if g2 is g else 1, 0, "first-col", g2))
    except TypedFormError:
        pass
    try:
        f2 = _ensure(f, last_row=True)
        options.append((0 if f2 is f else 1, 1, "last-row", f2))
    except TypedFormError:
        pass
    if not options:
        return _mul_generic(f, g)
    _, _, kind, sys = min(options, key=lambda o: (o[0], o[1]))
    if kind == "first-col":
        return _mul_first_col(_normal_v(f), sys)
    return _mul_last_row(sys, g)


_STRATEGY_ALIASES = {"type-(*,1)": "first-col", "type-(1,*)": "last-row"}


def _normal_v(f: ALS) -> ALS:
    """Row transformation only, bringing ``v`` to ``lambda e_n``."""
    n = f.n
    if f.v.submatrix(range(n - 1), [0]).is_zero():
        return f
    return normal_form(f, False, False)


def _ensure(f: ALS, first_col: bool = False, last_row: bool = False) -> ALS:
    if ((not first_col or _has_first_col_form(f)) and (not last_row or _has_last_row_form(f))
            and f.v.submatrix(range(f.n - 1), [0]).is_zero()):
        return f
    return normal_form(f, first_col, last_row)


def _inv_generic(f: ALS) -> ALS:
    n = f.n
    coeffs = []
    for idx, a in enumerate(f.coeffs):
        if idx == 0:
            coeffs.append(block_matrix([[-f.v, a], [None, f.u]], [n, 1], [1, n]))
        else:
            coeffs.append(block_matrix([[None, a], [None, None]], [n, 1], [1, n]))
    v = Mat.unit_column(n + 1, n)
    return ALS.build(f.alphabet, coeffs, v)


def _typed_inverse(f: ALS, t: ElementType) -> ALS:
    n = f.n
    sig = Mat.reversal(n - 2) if n >= 2 else None
    alph = f.alphabet
    if t.one_in_R and t.one_in_L:
        g = normal_form(f, True, True)
        lam = g.v[n - 1, 0]
        mid, last = range(1, n - 1), n - 1
        coeffs = []
        for a in g.coeffs:
            b1 = a.submatrix([0], mid)
            b = a.submatrix([0], [last])
            bb = a.submatrix(mid, mid)
            b2 = a.submatrix(mid, [last])
            coeffs.append(block_matrix(
                [[-(sig @ b2).scale(lam), -(sig @ bb @ sig)],
                 [-b.scale(lam), -(b1 @ sig)]],
                [n - 2, 1], [1, n - 2]))
        return ALS.build(alph, coeffs, Mat.unit_column(n - 1, n - 2))
    if t.one_in_R:
        g = normal_form(f, True, False)
        lam = g.v[n - 1, 0]
        mid, last = range(1, n - 1), n - 1
        coeffs = []
        for idx, a in enumerate(g.coeffs):
            b1 = a.submatrix([0], mid)
            b = a.submatrix([0], [last])
            bb = a.submatrix(mid, mid)
            b2 = a.submatrix(mid, [last])
            c1 = a.submatrix([last], mid)
            c = a.submatrix([last], [last])
            one = Mat.identity(1) if idx == 0 else None
            coeffs.append(block_matrix(
                [[one, -c.scale(1 / lam), -(c1 @ sig).scale(1 / lam)],
                 [None, -(sig @ b2), -(sig @ bb @ sig)],
                 [None, -b, -(b1 @ sig)]],
                [1, n - 2, 1], [1, 1, n - 2]))
        return ALS.build(alph, coeffs, Mat.unit_column(n, n - 1))
    if t.one_in_L:
        g = normal_form(f, False, True)
        lam = g.v[n - 1, 0]
        mid, last = range(1, n - 1), n - 1
        coeffs = []
        for idx, a in enumerate(g.coeffs):
            aa = a.submatrix([0], [0])
            a1 = a.submatrix(mid, [0])
            b1 = a.submatrix([0], mid)
            b = a.submatrix([0], [last])
            bb = a.submatrix(mid, mid)
            b2 = a.submatrix(mid, [last])
            one = Mat.identity(1) if idx == 0 else None
            coeffs.append(block_matrix(
                [[-(sig @ b2).scale(lam), -(sig @ bb @ sig), -(sig @ a1)],
                 [-b.scale(lam), -(b1 @ sig), -aa],
                 [None, None, one]],
                [n - 2, 1, 1], [1, n - 2, 1]))
        return ALS.build(alph, coeffs, Mat.unit_column(n, n - 1))
    g = _normal_v(f) if n >= 1 else f
    sig = Mat.reversal(n)
    coeffs = []
    for idx, a in enumerate(g.coeffs):
        sv = (sig @ g.v) if idx == 0 else None
        us = (g.u @ sig) if idx == 0 else None
        coeffs.append(block_matrix([[sv, -(sig @ a @ sig)], [None, us]], [n, 1], [1, n]))
    return ALS.build(alph, coeffs, Mat.unit_column(n + 1, n))


def invert(f: ALS, assume_minimal: bool = False, strategy: str = "auto") -> ALS:
    """Inverse ``f^{-1}``.

    ``auto`` minimizes first (unless ``assume_minimal``) and applies the typed
    minimal inverse; ``generic`` uses the plain dimension ``n + 1`` block.
    Raises :class:`DivisionByZero` for the zero element.
    """
    if f.n == 0:
        raise DivisionByZero()
    if strategy == "generic":
        return _inv_generic(f)
    if strategy != "auto":
        raise ValueError(f"unknown inversion strategy {strategy!r}")
    if not assume_minimal:
        from .minimize import minimize
        f = minimize(f)[0]
        if f.n == 0:
            raise DivisionByZero()
    c = scalar_value(f)
    if c is not None:
        return scalar_als(f.alphabet, 1 / c)
    return _typed_inverse(f, detect_type(f))


def normalize_regular(f: ALS) -> ALS | None:
    """``(u, I - N, A_0^{-1} v)`` when ``A_0`` is invertible, else ``None``."""
    if f.n == 0:
        return f
    inv = invert_scalar(f.coeffs[0])
    if inv is None:
        return None
    return apply_transformation(f, Transformation(inv, Mat.identity(f.n)), check=False)


def inverse_dimension(n: int, t: ElementType) -> int:
    """Dimension of the typed minimal inverse of a dimension-``n`` element."""
    if t.one_in_R and t.one_in_L:
        return n - 1
    if t.one_in_R or t.one_in_L:
        return n
    return n + 1


def sum_of(items: Sequence[ALS]) -> ALS:
    out = items[0]
    for it in items[1:]:
        out = add(out, it)
    return out
