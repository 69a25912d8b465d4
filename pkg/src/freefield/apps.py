"""Word problem, left factors, disjointness, left/right gcd, identity checking."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .als import ALS, Alphabet, XYZ, Transformation, apply_transformation
from .expr import Expr, UndefinedElement, compile_expr, parse_expr, to_poly
from .linalg import Mat
from .minimize import MinimizationTrace, minimize
from .ops import DivisionByZero, add, invert, mul, normalize_regular, poly_als, scalar_mul
from .oracle import is_polynomial, prob_eq, series_coeffs
from .poly import NCPoly

__all__ = [
    "as_als",
    "poly_from_als",
    "eq",
    "is_left_factor",
    "disjoint",
    "GcdResult",
    "lgcd",
    "rgcd",
    "IdentityVerdict",
    "check_identity",
    "ParanoiaError",
]


class ParanoiaError(AssertionError):
    """The structural and the randomized equality test disagree."""


def as_als(f, alphabet: Alphabet = XYZ, lazy: bool = False) -> ALS:
    if isinstance(f, ALS):
        return f
    if isinstance(f, NCPoly):
        return poly_als(f)
    return compile_expr(f, alphabet, lazy=lazy)


def poly_from_als(a: ALS) -> NCPoly | None:
    """The polynomial represented by ``a``, or ``None`` if it is not one."""
    m = minimize(a)[0]
    if m.n == 0:
        return NCPoly.zero(a.alphabet)
    if not is_polynomial(m):
        return None
    r = normalize_regular(m)
    return NCPoly.from_dict(a.alphabet, series_coeffs(r, m.n - 1).coeffs)


def eq(f, g, alphabet: Alphabet = XYZ, paranoid: bool = False, lazy: bool = False) -> bool:
    """Decide ``f = g`` by minimizing ``f - g``."""
    a, b = as_als(f, alphabet, lazy), as_als(g, alphabet, lazy)
    diff = minimize(add(a, scalar_mul(b, -1)))[0]
    verdict = diff.n == 0
    if paranoid:
        check = prob_eq(a, b)
        if verdict and check.verdict == "distinct":
            raise ParanoiaError("minimization says equal, a matrix point says distinct")
        if not verdict and check.verdict == "equal":
            # random points may miss a difference; confirm on the reduced difference
            if prob_eq(diff, as_als("0", alphabet), trials=40, seed=1).verdict == "equal":
                raise ParanoiaError("minimization says distinct, no matrix point separates them")
    return verdict


def is_left_factor(h, f, alphabet: Alphabet = XYZ) -> ALS | None:
    """Minimal system of ``h^{-1} f`` when that is a polynomial, else ``None``."""
    ha, fa = as_als(h, alphabet), as_als(f, alphabet)
    hm = minimize(ha)[0]
    if hm.n == 0:
        raise DivisionByZero()
    r = minimize(mul(invert(hm, assume_minimal=True), fa))[0]
    return r if is_polynomial(r) else None


def disjoint(f, g, alphabet: Alphabet = XYZ) -> bool:
    """Rank additivity: ``rank(f + g) = rank(f) + rank(g)``."""
    a, b = as_als(f, alphabet), as_als(g, alphabet)
    ra, rb = minimize(a)[0].n, minimize(b)[0].n
    return minimize(add(a, b))[0].n == ra + rb


@dataclass
class GcdResult:
    gcd: NCPoly
    factors: list[NCPoly]
    intermediate_dim: int         # dimension of the minimized system for p^{-1} q
    glued_dim: int                # dimension before minimization
    verified: bool                # gcd divides both inputs (always checked)
    example_grade: bool           # unbalanced or unreadable elimination steps occurred
    trace: MinimizationTrace = field(repr=False, default=None)
    notes: list[str] = field(default_factory=list)


def _labelled(a: ALS, tag: str) -> ALS:
    return a.replace(labels=tuple((tag, i) for i in range(a.n)))


def _block_candidates(before: ALS, idx: list[int]) -> Iterable[ALS]:
    """Systems ``(e_a, B, e_b)`` over an eliminated diagonal block ``B``; the
    corner ``(last, last)`` comes first."""
    k = len(idx)
    slices = [c.submatrix(idx, idx) for c in before.coeffs]
    order = [(k - 1, k - 1)] + [(a, b) for a in range(k) for b in range(k) if (a, b) != (k - 1, k - 1)]
    for a, b in order:
        perm = list(range(k))
        perm[0], perm[a] = perm[a], perm[0]
        q = Mat.from_sparse(k, k, [(perm[j], j, 1) for j in range(k)])
        sysb = ALS.build(before.alphabet, slices, Mat.unit_column(k, b), u=Mat.unit_row(k, a))
        yield apply_transformation(sysb, Transformation(Mat.identity(k), q), check=False)


def _factor_from_block(before: ALS, idx: list[int]) -> list[NCPoly]:
    """Polynomials ``h`` of rank ``len(idx) + 1`` whose inverse the block carries."""
    out = []
    for cand in _block_candidates(before, idx):
        m = minimize(cand)[0]
        if m.n == 0:
            continue
        h = poly_from_als(invert(m, assume_minimal=True))
        if h is not None and not h.is_constant and minimize(poly_als(h))[0].n == len(idx) + 1:
            h = h.normalized()
            if h not in out:
                out.append(h)
    return out


def _divides(h: NCPoly, f: NCPoly) -> bool:
    return is_left_factor(poly_als(h), poly_als(f), h.alphabet) is not None


def _cofactor(reduced: ALS) -> ALS | None:
    """The polynomial ``q'`` with ``p^{-1} q = p'^{-1} q'`` read off the q-side.

    Works when the p-side rows couple to the q-side columns through a single
    scalar row ``c`` (up to linear forms on the p-side); then ``q' = c s_q``.
    """
    labels = reduced.labels or ()
    ps = [i for i, lab in enumerate(labels) if lab[0] == "p"]
    qs = [i for i, lab in enumerate(labels) if lab[0] == "q"]
    alphabet = reduced.alphabet
    if not qs:
        return ALS.build(alphabet, [Mat.identity(1)] + [Mat.zeros(1, 1)] * alphabet.d,
                         Mat.column([1]))
    if not ps:
        return reduced
    if qs[0] < ps[-1]:
        return None
    from .linalg import column_space_basis, vstack
    coupling = vstack(*[c.submatrix(ps, qs) for c in reduced.coeffs])
    basis = column_space_basis(coupling.transpose())
    if basis.cols != 1:
        return None
    row = basis.transpose()
    k = len(qs)
    coeffs = []
    for idx, c in enumerate(reduced.coeffs):
        top = [[Fraction(int(idx == 0))] + (row.entries() if idx == 0 else [Fraction(0)] * k)]
        body = [[Fraction(0)] + r for r in c.submatrix(qs, qs).tolist()]
        coeffs.append(Mat.from_rows(top + body))
    v = Mat.column([0] + reduced.v.submatrix(qs, [0]).entries())
    return ALS.build(alphabet, coeffs, v)


def _cofactor_gcd(reduced: ALS, qa: ALS, prefix: NCPoly, p: NCPoly, q: NCPoly) -> NCPoly | None:
    """Remaining factor ``prefix^{-1} q q'^{-1}`` when it is a verified polynomial."""
    cof = _cofactor(reduced)
    if cof is None:
        return None
    cm = minimize(cof)[0]
    if cm.n == 0:
        return None
    h = poly_from_als(mul(qa, invert(cm, assume_minimal=True)))
    if h is None or h.is_constant or not (_divides(h, p) and _divides(h, q)):
        return None
    rest = is_left_factor(poly_als(prefix), poly_als(h), h.alphabet)
    if rest is None:
        return None
    r = poly_from_als(rest)
    return r.normalized() if r is not None and not r.is_constant else None


def lgcd(p: NCPoly | Expr | str, q: NCPoly | Expr | str, alphabet: Alphabet = XYZ) -> GcdResult:
    """Left gcd by minimizing a glued system for ``p^{-1} q``.

    Elimination steps are grouped until equally many p-side and q-side indices
    are gone; each group's eliminated p-side diagonal block carries the
    inverse of one common left factor.  Every factor is accepted only if the
    running product still left-divides both ``p`` and ``q``.
    """
    p = p if isinstance(p, NCPoly) else to_poly(p, alphabet)
    q = q if isinstance(q, NCPoly) else to_poly(q, alphabet)
    if p.is_constant or q.is_constant:
        raise ValueError("lgcd needs nonconstant polynomials")
    pa = minimize(poly_als(p))[0]
    qa = minimize(poly_als(q))[0]
    pinv = _labelled(invert(pa, assume_minimal=True), "p")
    glued = mul(pinv, _labelled(qa, "q"))
    reduced, trace = minimize(glued, keep_snapshots=True)
    one = NCPoly.constant(p.alphabet, 1)
    factors: list[NCPoly] = []
    prefix = one
    notes: list[str] = []
    example_grade = False
    pc = qc = 0
    pending: list[tuple[ALS, list[int]]] = []
    stopped = False
    for step in trace.steps:
        labels = step.labels or ()
        p_idx = [i - 1 for i, lab in zip(step.removed, labels) if lab[0] == "p"]
        pc += len(p_idx)
        qc += sum(1 for lab in labels if lab[0] == "q")
        if p_idx:
            # extended snapshots carry the extra index 0 in front
            shift = 1 if step.extended else 0
            pending.append((step.before, [i + shift for i in p_idx]))
        if pc != qc or pc == 0 or stopped:
            continue
        group = pending
        pending = []
        pc = qc = 0
        accepted = True
        for before, idx in group:
            found = None
            if before is not None:
                for h in _factor_from_block(before, idx):
                    cand = prefix * h
                    if _divides(cand, p) and _divides(cand, q):
                        found = h
                        break
            if found is None:
                accepted = False
                break
            factors.append(found)
            prefix = prefix * found
        if not accepted:
            notes.append(f"could not read a verified factor at step '{step.render()}'")
            example_grade = True
            stopped = True
    if pending or pc or qc:
        example_grade = True
        notes.append("single-sided elimination steps remained after the last balanced group")
        rest = _cofactor_gcd(reduced, qa, prefix, p, q)
        if rest is not None:
            factors.append(rest)
            prefix = prefix * rest
            notes.append("last factor read from the q-side cofactor of the minimal system")
    verified = _divides(prefix, p) and _divides(prefix, q)
    return GcdResult(prefix.normalized(), factors, reduced.n, glued.n, verified,
                     example_grade, trace, notes)


def rgcd(p, q, alphabet: Alphabet = XYZ) -> GcdResult:
    """Right gcd: the reversal of the left gcd of the reversed polynomials."""
    p = p if isinstance(p, NCPoly) else to_poly(p, alphabet)
    q = q if isinstance(q, NCPoly) else to_poly(q, alphabet)
    res = lgcd(p.reversed(), q.reversed(), alphabet)
    res.gcd = res.gcd.reversed().normalized()
    res.factors = [h.reversed().normalized() for h in reversed(res.factors)]
    res.verified = res.verified
    return res


@dataclass(frozen=True)
class IdentityVerdict:
    line: int
    text: str
    verdict: str                  # "true" | "false" | "undefined" | "error"
    lhs_rank: int | None = None
    rhs_rank: int | None = None
    message: str = ""

    def render(self) -> str:
        if self.verdict in ("true", "false"):
            return f"{self.line}: {self.verdict} (ranks {self.lhs_rank}, {self.rhs_rank})"
        return f"{self.line}: {self.verdict} ({self.message})"


def check_identity(lines: Iterable[str], alphabet: Alphabet = XYZ,
                   lazy: bool = False) -> list[IdentityVerdict]:
    """One verdict per ``lhs == rhs`` line; ``#`` starts a comment."""
    out = []
    for no, raw in enumerate(lines, 1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if body.count("==") != 1:
            out.append(IdentityVerdict(no, body, "error", message="expected exactly one '=='"))
            continue
        left, right = (s.strip() for s in body.split("=="))
        try:
            le, re_ = parse_expr(left, alphabet), parse_expr(right, alphabet)
        except ValueError as exc:
            out.append(IdentityVerdict(no, body, "error", message=str(exc)))
            continue
        sides = []
        for name, e in (("left", le), ("right", re_)):
            try:
                sides.append(compile_expr(e, alphabet, lazy=lazy))
            except UndefinedElement as exc:
                sides.append(f"{name} side: {exc}")
        bad = [s for s in sides if isinstance(s, str)]
        if bad:
            out.append(IdentityVerdict(no, body, "undefined", message="; ".join(bad)))
            continue
        a, b = sides
        ra, rb = minimize(a)[0].n, minimize(b)[0].n
        same = minimize(add(a, scalar_mul(b, -1)))[0].n == 0
        out.append(IdentityVerdict(no, body, "true" if same else "false", ra, rb))
    return out
