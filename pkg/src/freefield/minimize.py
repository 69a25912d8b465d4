"""Block minimization of admissible linear systems.

A left step at block ``k`` looks for ``T, U`` with

    A_kk U + A_k> + T A_>> = 0   and   v_k + T v_> = 0,

after which the transformed block row ``k`` only touches ``s_k`` with a zero
right hand side, so ``s_k = 0`` and block ``k`` can be dropped.  A right step
at block ``k`` solves ``A_<< U + A_<k + T A_kk = 0`` and drops a block column
whose right family part vanishes.  Both are plain linear systems over the
rationals.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable

from .als import (ALS, ExtendedALS, Transformation, apply_transformation, empty_als, extend,
                  pivot_structure, restrict)
from .linalg import Mat, column_space_basis, hstack, invert_scalar, solve

__all__ = [
    "MinimizationSystem",
    "MinimizationStep",
    "MinimizationTrace",
    "Certificate",
    "build_left_equations",
    "build_right_equations",
    "solve_system",
    "apply_block_elimination",
    "minimize",
    "minimality_certificate",
    "rank",
    "normalize_rhs",
]


@dataclass(frozen=True)
class MinimizationSystem:
    side: str                      # "L" or "R"
    k: int                         # 1-based block index (of the plain system)
    extended: bool
    block: tuple[int, ...]         # indices of block k in the system the equations refer to
    other: tuple[int, ...]         # indices of the blocks after (L) or before (R) block k
    t_shape: tuple[int, int]
    u_shape: tuple[int, int]
    matrix: Mat
    rhs: Mat
    unknowns: tuple[int, ...]      # full unknown index of each matrix column
    coefficient_rows: int          # (d + 1) * number of constrained pencil entries
    v_rows: int

    @property
    def full_unknowns(self) -> int:
        return 2 * self.t_shape[0] * self.t_shape[1]


@dataclass(frozen=True)
class MinimizationStep:
    side: str
    k: int
    dim_before: int
    dim_after: int
    removed: tuple[int, ...]                  # 1-based indices in the system before the step
    labels: tuple[Hashable, ...] | None
    extended: bool = False
    before: ALS | None = None                 # transformed system right before the removal

    def render(self) -> str:
        idx = ",".join(str(i) for i in self.removed)
        return f"{self.side} k:{self.k} dim:{self.dim_before}->{self.dim_after} removed:{idx}"


@dataclass
class MinimizationTrace:
    steps: list[MinimizationStep] = field(default_factory=list)
    refined: bool = True
    regular_point: bool = True
    notes: list[str] = field(default_factory=list)

    def render(self) -> str:
        return "\n".join(s.render() for s in self.steps)

    def __len__(self) -> int:
        return len(self.steps)


def _system_of(a: ALS | ExtendedALS) -> tuple[ALS, bool]:
    if isinstance(a, ExtendedALS):
        return a.base, True
    return a, False


def _flint_entries(m: Mat):
    return m.flint.entries()


def build_left_equations(a: ALS | ExtendedALS, k: int) -> MinimizationSystem:
    """Flattened left equations for block ``k`` (1-based, ``1 <= k <= m - 1``).

    On an :class:`ExtendedALS`, ``k = 1`` addresses the true first block and
    no admissibility constraint applies; on a plain system ``k = 1`` fixes the
    first row of ``U`` to zero so that ``Q(U)`` stays admissible.
    """
    sys_, ext = _system_of(a)
    if sys_.n == 0:
        raise ValueError("no blocks in the empty system")
    ps = pivot_structure(sys_)
    m_eff = ps.m - 1 if ext else ps.m
    if not 1 <= k <= m_eff - 1:
        raise ValueError(f"left block index {k} out of range 1..{m_eff - 1}")
    kk = k + 1 if ext else k
    block = list(ps.block_range(kk))
    other = list(range(block[-1] + 1, sys_.n))
    fixed_u_row0 = (not ext) and block[0] == 0
    return _assemble(sys_, "L", k, ext, block, other, fixed_u_row0)


def build_right_equations(a: ALS, k: int) -> MinimizationSystem:
    """Flattened right equations for block ``k`` (1-based, ``2 <= k <= m``)."""
    if isinstance(a, ExtendedALS):
        raise TypeError("right equations act on plain systems")
    if a.n == 0:
        raise ValueError("no blocks in the empty system")
    ps = pivot_structure(a)
    if not 2 <= k <= ps.m:
        raise ValueError(f"right block index {k} out of range 2..{ps.m}")
    block = list(ps.block_range(k))
    other = list(range(block[0]))
    return _assemble(a, "R", k, False, block, other, True)


def _assemble(a: ALS, side: str, k: int, ext: bool, block: list[int], other: list[int],
              fix_u_row0: bool) -> MinimizationSystem:
    nb, no = len(block), len(other)
    n = a.n
    bpos = {p: i for i, p in enumerate(block)}
    opos = {p: i for i, p in enumerate(other)}
    if side == "L":
        t_shape = u_shape = (nb, no)
        per = nb * no
    else:
        t_shape = u_shape = (no, nb)
        per = no * nb
    n_unknowns = 2 * per
    items: list[tuple[int, int, object]] = []
    rhs_items: list[tuple[int, int, object]] = []
    for c_idx, coeff in enumerate(a.coeffs):
        base = c_idx * per
        ent = _flint_entries(coeff)
        for pos, x in enumerate(ent):
            if x == 0:
                continue
            p, q = divmod(pos, n)
            if side == "L":
                # rows: (i in block, j in other) -> base + i*no + j
                if p in opos and q in opos:
                    l_, j = opos[p], opos[q]
                    for i in range(nb):
                        items.append((base + i * no + j, i * no + l_, x))
                elif p in bpos and q in bpos:
                    i, l_ = bpos[p], bpos[q]
                    for j in range(no):
                        items.append((base + i * no + j, per + l_ * no + j, x))
                elif p in bpos and q in opos:
                    rhs_items.append((base + bpos[p] * no + opos[q], 0, -x))
            else:
                # rows: (i in other, j in block) -> base + i*nb + j
                if p in opos and q in opos:
                    i, l_ = opos[p], opos[q]
                    for j in range(nb):
                        items.append((base + i * nb + j, per + l_ * nb + j, x))
                elif p in bpos and q in bpos:
                    l_, j = bpos[p], bpos[q]
                    for i in range(no):
                        items.append((base + i * nb + j, i * nb + l_, x))
                elif p in opos and q in bpos:
                    rhs_items.append((base + opos[p] * nb + bpos[q], 0, -x))
    coeff_rows = len(a.coeffs) * per
    v_rows = 0
    if side == "L":
        v_rows = nb
        vent = _flint_entries(a.v)
        for l_, q in enumerate(other):
            x = vent[q]
            if x != 0:
                for i in range(nb):
                    items.append((coeff_rows + i, i * no + l_, x))
        for i, p in enumerate(block):
            if vent[p] != 0:
                rhs_items.append((coeff_rows + i, 0, -vent[p]))
    rows = coeff_rows + v_rows
    if fix_u_row0:
        u_cols = u_shape[1]
        fixed = set(range(per, per + u_cols))
    else:
        fixed = set()
    keep = [j for j in range(n_unknowns) if j not in fixed]
    remap = {j: c for c, j in enumerate(keep)}
    mat = Mat.from_sparse(rows, len(keep), ((r, remap[c], x) for r, c, x in items if c in remap))
    rhs = Mat.from_sparse(rows, 1, rhs_items)
    return MinimizationSystem(side, k, ext, tuple(block), tuple(other), t_shape, u_shape,
                              mat, rhs, tuple(keep), coeff_rows, v_rows)


def solve_system(s: MinimizationSystem) -> tuple[Mat, Mat] | None:
    """The particular solution ``(T, U)`` (free variables zero), or ``None``."""
    res = solve(s.matrix, s.rhs)
    if res is None:
        return None
    part = res[0].entries()
    full = [Fraction(0)] * s.full_unknowns
    for c, j in enumerate(s.unknowns):
        full[j] = part[c]
    half = s.full_unknowns // 2
    r, c = s.t_shape
    return Mat(r, c, full[:half]), Mat(r, c, full[half:])


def _embed(n: int, rows, cols, block: Mat) -> Mat:
    items = [(i, i, 1) for i in range(n)]
    ent = block.entries()
    w = block.cols
    for a, p in enumerate(rows):
        for b, q in enumerate(cols):
            x = ent[a * w + b]
            if x:
                items.append((p, q, x))
    return Mat.from_sparse(n, n, items)


class EliminationError(RuntimeError):
    """A block transformation did not produce the promised zero block."""


def apply_block_elimination(a: ALS | ExtendedALS, s: MinimizationSystem,
                            solution: tuple[Mat, Mat]) -> tuple[ALS | ExtendedALS, MinimizationStep]:
    """Apply ``(P(T), Q(U))``, verify the zero block row/column and remove it."""
    sys_, ext = _system_of(a)
    n = sys_.n
    t, u = solution
    block, other = list(s.block), list(s.other)
    if s.side == "L":
        p = _embed(n, block, other, t)
        q = _embed(n, block, other, u)
    else:
        p = _embed(n, other, block, t)
        q = _embed(n, other, block, u)
    tr = Transformation(p, q)
    if not tr.admissible:
        raise EliminationError("block transformation is not admissible")
    b = apply_transformation(sys_, tr, check=False)
    bset = set(block)
    outside = [i for i in range(n) if i not in bset]
    for c in b.coeffs:
        part = c.submatrix(block, outside) if s.side == "L" else c.submatrix(outside, block)
        if not part.is_zero():
            raise EliminationError(f"{s.side} step at block {s.k} left a nonzero entry")
    if s.side == "L" and not b.v.submatrix(block, [0]).is_zero():
        raise EliminationError(f"left step at block {s.k} left a nonzero right hand side")
    reduced = b.without(block)
    shift = 0 if not ext else 1
    removed = tuple(i + 1 - shift for i in block)
    labels = tuple(b.labels[i] for i in block) if b.labels is not None else None
    step = MinimizationStep(s.side, s.k, n - shift, n - shift - len(block), removed, labels,
                            ext, before=b)
    return (ExtendedALS(reduced) if ext else reduced), step


def _refine(a: ALS, trace: MinimizationTrace) -> ALS:
    from .refine import refine
    out, report = refine(a)
    trace.refined = report.fully_refined
    return out


def _decrement(k: int, m: int) -> int:
    return k - 1 if k > max(2, Fraction(m + 1, 2)) else k


def minimize(a: ALS, *, refine: bool = True, complete: bool = True,
             keep_snapshots: bool = False) -> tuple[ALS, MinimizationTrace]:
    """Minimize an admissible system; returns the empty system iff it represents 0.

    The block loop follows the left/right step schedule for refined systems.
    Afterwards a reachability/observability pass at a regular scalar point
    (``complete=True``) removes any dependency the block equations could not
    see, e.g. inside blocks the refiner failed to split.  Finally the right
    hand side is brought to ``lambda e_n``.
    """
    trace = MinimizationTrace()
    if not a.is_admissible:
        raise ValueError("minimize needs an admissible system (u = e_1)")
    if a.n == 0 or a.v.is_zero():
        return empty_als(a.alphabet), trace
    if refine:
        a = _refine(a, trace)

    def record(step: MinimizationStep):
        if not keep_snapshots:
            step = MinimizationStep(step.side, step.k, step.dim_before, step.dim_after,
                                    step.removed, step.labels, step.extended)
        trace.steps.append(step)

    k = 2
    while a.n and k <= pivot_structure(a).m:
        m = pivot_structure(a).m
        kp = m + 1 - k
        s = build_left_equations(a, kp)
        sol = solve_system(s)
        if sol is not None:
            if kp == 1:
                record(MinimizationStep("L", 1, a.n, 0, tuple(range(1, a.n + 1)), a.labels))
                return empty_als(a.alphabet), trace
            a, step = apply_block_elimination(a, s, sol)
            record(step)
            k = _decrement(k, m)
            if refine:
                a = _refine(a, trace)
            continue
        if kp == 1:
            e = extend(a)
            s = build_left_equations(e, 1)
            sol = solve_system(s)
            if sol is not None:
                e2, step = apply_block_elimination(e, s, sol)
                a = restrict(e2)
                record(MinimizationStep("L", 1, step.dim_before, a.n, step.removed, step.labels,
                                        True, step.before))
                if a.n == 0:
                    return a, trace
                k = _decrement(k, m)
                if refine:
                    a = _refine(a, trace)
                continue
        s = build_right_equations(a, k)
        sol = solve_system(s)
        if sol is not None:
            a, step = apply_block_elimination(a, s, sol)
            record(step)
            k = _decrement(k, m)
            if refine:
                a = _refine(a, trace)
            continue
        k += 1
    if complete and a.n:
        a = _complete(a, trace)
        if a.n == 0:
            return a, trace
    return normalize_rhs(a), trace


def normalize_rhs(a: ALS) -> ALS:
    """Row transformation with ``P v = lambda e_n``.

    The pivot row is the lowest index with ``v_j != 0`` inside the last pivot
    block (so the block structure survives); it absorbs all other entries and
    is then swapped into position ``n``.
    """
    n = a.n
    if n == 0:
        return a
    v = a.v.entries()
    start = pivot_structure(a).starts[-1]
    cand = [j for j in range(start, n) if v[j] != 0] or [j for j in range(n) if v[j] != 0]
    if not cand:
        return a
    j = cand[0]
    if all(v[i] == 0 for i in range(n) if i != j) and j == n - 1:
        return a
    items = [(i, i, 1) for i in range(n)]
    for i in range(n):
        if i != j and v[i] != 0:
            items.append((i, j, -v[i] / v[j]))
    p = Mat.from_sparse(n, n, items)
    if j != n - 1:
        perm = list(range(n))
        perm[j], perm[n - 1] = perm[n - 1], perm[j]
        swap = Mat.from_sparse(n, n, [(i, perm[i], 1) for i in range(n)])
        p = swap @ p
    return apply_transformation(a, Transformation(p, Mat.identity(n)), check=False)


def _regular_point(a: ALS, tries: int = 24) -> tuple[tuple[int, ...], Mat] | None:
    d = a.alphabet.d
    rng = random.Random(0x5EED + a.n)
    candidates = [(0,) * d]
    for _ in range(tries):
        candidates.append(tuple(rng.randint(-3, 3) for _ in range(d)))
    for alpha in candidates:
        b = a.coeffs[0]
        for ell, x in enumerate(alpha, 1):
            if x:
                b = b + a.coeffs[ell].scale(x)
        binv = invert_scalar(b)
        if binv is not None:
            return alpha, binv
    return None


def _krylov(start: Mat, ops: list[Mat]) -> Mat:
    """Reduced column-echelon basis of the smallest subspace containing
    ``start``'s columns and invariant under every matrix in ``ops``."""
    basis = column_space_basis(start)
    frontier = basis
    while frontier.cols:
        grown = column_space_basis(hstack(basis, *[op @ frontier for op in ops]))
        if grown.cols == basis.cols:
            break
        frontier = grown
        basis = grown
    return basis


def _pivot_rows(basis: Mat) -> list[int]:
    """Pivot rows of a reduced column-echelon basis (first nonzero per column)."""
    rows = []
    for j in range(basis.cols):
        for i in range(basis.rows):
            if basis[i, j] != 0:
                rows.append(i)
                break
    return rows


def _complete(a: ALS, trace: MinimizationTrace) -> ALS:
    """Reachability then observability reduction at a regular scalar point."""
    point = _regular_point(a)
    if point is None:
        trace.regular_point = False
        trace.notes.append("no regular scalar point found; completion pass skipped")
        return a
    _, binv = point
    n = a.n
    ops = [binv @ c for c in a.coeffs[1:]]
    reach = _krylov(binv @ a.v, ops)
    piv = _pivot_rows(reach)
    if 0 not in piv:
        trace.steps.append(MinimizationStep("K", 0, n, 0, tuple(range(1, n + 1)), a.labels))
        return empty_als(a.alphabet)
    if reach.cols < n:
        comp = [Mat.unit_column(n, i) for i in range(n) if i not in set(piv)]
        q = hstack(reach, *comp)
        p = invert_scalar(q) @ binv
        b = apply_transformation(a, Transformation(p, q), check=False)
        drop = list(range(reach.cols, n))
        trace.steps.append(MinimizationStep("K", 0, n, reach.cols, tuple(i + 1 for i in drop),
                                            tuple(b.labels[i] for i in drop) if b.labels else None))
        a = b.without(drop)
        n = a.n
        point = _regular_point(a)
        binv = point[1]
        ops = [binv @ c for c in a.coeffs[1:]]
    # unobservable space: kernel vectors z with u N_w z = 0 for all words w
    obs = _krylov(a.u.transpose(), [op.transpose() for op in ops])
    if obs.cols < n:
        from .linalg import nullspace
        ker = nullspace(obs.transpose())
        kbasis = column_space_basis(hstack(*ker))
        kp = set(_pivot_rows(kbasis))
        comp = [Mat.unit_column(n, i) for i in range(n) if i not in kp]
        q = hstack(*comp, kbasis)
        if q[0, 0] != 1 or any(q[0, j] != 0 for j in range(1, n)):
            raise RuntimeError("observability completion lost admissibility")
        p = invert_scalar(q) @ binv
        b = apply_transformation(a, Transformation(p, q), check=False)
        keep = n - kbasis.cols
        drop = list(range(keep, n))
        for c in b.coeffs:
            if not c.submatrix(range(keep), drop).is_zero():
                raise RuntimeError("observability completion produced no zero block")
        trace.steps.append(MinimizationStep("K", 0, n, keep, tuple(i + 1 for i in drop),
                                            tuple(b.labels[i] for i in drop) if b.labels else None))
        a = b.without(drop)
    return a


@dataclass(frozen=True)
class Certificate:
    minimal: bool
    witness: tuple[str, int, Mat, Mat] | None = None   # (side, k, T, U)
    caveat: str | None = None


def minimality_certificate(a: ALS) -> Certificate:
    """``minimal=True`` iff no left (incl. extended ``k = 1``) or right block
    equation is solvable.  Only conclusive for refined systems."""
    if a.n == 0:
        return Certificate(True, caveat="empty system")
    ps = pivot_structure(a)
    caveat = None
    if ps.m == 1:
        caveat = "single pivot block; no block equations to check"
        if a.n == 1:
            return Certificate(True, caveat=caveat)
    for k in range(1, ps.m):
        s = build_left_equations(a, k)
        sol = solve_system(s)
        if sol is not None:
            return Certificate(False, ("L", k, *sol))
    if ps.m >= 2:
        s = build_left_equations(extend(a), 1)
        sol = solve_system(s)
        if sol is not None:
            return Certificate(False, ("L+0", 1, *sol))
    for k in range(2, ps.m + 1):
        s = build_right_equations(a, k)
        sol = solve_system(s)
        if sol is not None:
            return Certificate(False, ("R", k, *sol))
    return Certificate(True, caveat=caveat)


def rank(f) -> int:
    """Dimension of a minimal system for ``f`` (an ALS or an expression)."""
    if not isinstance(f, ALS):
        from .expr import compile_expr
        f = compile_expr(f)
    return minimize(f)[0].n
