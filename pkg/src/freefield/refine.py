"""Refinement of pivot blocks.

A pivot block ``B`` (its ``d + 1`` coefficient slices) splits when invertible
``T``, ``U`` give every ``T B_l U`` a lower-left zero block.  With ``R`` the
last ``i`` rows of ``T`` and ``C`` the first ``n_k - i`` columns of ``U`` that
is the bilinear condition ``R B_l C = 0`` for all ``l``.

Blocks of size 2 are decided exactly over the rationals.  For larger blocks,
if some scalar combination ``B_c`` of the slices is invertible, a split is the
same thing as a proper subspace ``C`` invariant under every ``B_c^{-1} B_l``
(then ``R`` annihilates ``B_c C``).  That module question is settled with the
MeatAxe: spin a kernel vector of ``g(theta)`` for an irreducible factor ``g``
of the characteristic polynomial of a random algebra element ``theta``, and
apply Norton's dual test to certify irreducibility.  When neither succeeds
the block is searched by alternating kernel computations from unit-vector
seeds, and a negative answer there is only heuristic.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import flint

from .als import ALS, Transformation, apply_transformation, pivot_structure
from .linalg import Mat, hstack, invert_scalar, left_nullspace, nullspace, rank, solve, vstack

__all__ = ["BlockStatus", "RefinementReport", "refine", "search_block_split", "Split"]

CERTIFIED = "refined-certified"
HEURISTIC = "refined-heuristic"
SPLIT = "split"

MAX_SEEDS = 64          # per split size and direction
SEED_BUDGET = 512       # per block, spread over all split sizes
MAX_ALTERNATIONS = 8
MEATAXE_TRIES = 12      # random algebra elements per block
PENCIL_POINTS = 12      # scalar combinations tried for an invertible B_c


@dataclass(frozen=True)
class Split:
    t: Mat        # invertible, acts on the block rows
    u: Mat        # invertible, acts on the block columns
    i: int        # rows of the lower-left zero block

    @property
    def zero_block(self) -> tuple[int, int]:
        return self.i, self.u.cols - self.i


@dataclass(frozen=True)
class BlockStatus:
    start: int                # 0-based first index of the block (at the time of checking)
    size: int
    status: str
    split: Split | None = None
    splits_over_extension: bool = False  # only decided for 2x2 blocks

    def render(self) -> str:
        extra = f" i={self.split.i}" if self.split else ""
        ext = " (splits over an algebraic extension)" if self.splits_over_extension else ""
        return f"block {self.start + 1}..{self.start + self.size}: {self.status}{extra}{ext}"


@dataclass
class RefinementReport:
    blocks: list[BlockStatus] = field(default_factory=list)

    @property
    def fully_refined(self) -> bool:
        """True when no remaining block relies on the heuristic search."""
        return all(b.status != HEURISTIC for b in self.final_blocks)

    @property
    def final_blocks(self) -> list[BlockStatus]:
        return [b for b in self.blocks if b.status != SPLIT]

    @property
    def splits(self) -> list[BlockStatus]:
        return [b for b in self.blocks if b.status == SPLIT]

    def render(self) -> str:
        return "\n".join(b.render() for b in self.blocks)


def _verify(blocks: list[Mat], split: Split) -> bool:
    n = split.u.rows
    i = split.i
    if invert_scalar(split.t) is None or invert_scalar(split.u) is None:
        return False
    rows = range(n - i, n)
    cols = range(n - i)
    return all((split.t @ b @ split.u).submatrix(rows, cols).is_zero() for b in blocks)


def _complete_rows(r: Mat, n: int) -> Mat | None:
    """Unit rows (lowest index first) stacked above ``r`` to an invertible matrix."""
    chosen: list[Mat] = []
    need = n - r.rows
    for j in range(n):
        if len(chosen) == need:
            break
        trial = vstack(*chosen, Mat.unit_row(n, j), r)
        if rank(trial) == trial.rows:
            chosen.append(Mat.unit_row(n, j))
    out = vstack(*chosen, r) if chosen else r
    return out if out.rows == n and rank(out) == n else None


def _complete_cols(c: Mat, n: int, admissible: bool) -> Mat | None:
    """Columns ``c`` followed by unit columns to an invertible matrix.

    With ``admissible`` the result must have first row ``e_1``: ``c`` is
    rebased so that only its first column touches coordinate 0, and the
    completion avoids coordinate 0.
    """
    if admissible:
        cols = [c.submatrix(range(n), [j]) for j in range(c.cols)]
        lead = next((j for j, v in enumerate(cols) if v[0, 0] != 0), None)
        if lead is None:
            return None
        first = cols[lead].scale(1 / cols[lead][0, 0])
        rest = [v - first.scale(v[0, 0]) for k, v in enumerate(cols) if k != lead]
        c = hstack(first, *rest)
    chosen: list[Mat] = []
    need = n - c.cols
    for j in range(1 if admissible else 0, n):
        if len(chosen) == need:
            break
        trial = hstack(c, *chosen, Mat.unit_column(n, j))
        if rank(trial) == trial.cols:
            chosen.append(Mat.unit_column(n, j))
    out = hstack(c, *chosen)
    return out if out.cols == n and rank(out) == n else None


def _make_split(blocks: list[Mat], r: Mat, c: Mat, admissible: bool) -> Split | None:
    n = blocks[0].rows
    t = _complete_rows(r, n)
    u = _complete_cols(c, n, admissible)
    if t is None or u is None:
        return None
    s = Split(t, u, r.rows)
    return s if _verify(blocks, s) else None


def _cols_from(r: Mat, blocks: list[Mat]) -> list[Mat]:
    return nullspace(vstack(*[r @ b for b in blocks]))


def _rows_from(c: Mat, blocks: list[Mat]) -> list[Mat]:
    return left_nullspace(hstack(*[b @ c for b in blocks]))


def _try_rows(blocks, r: Mat, i: int, admissible: bool) -> Split | None:
    n = blocks[0].rows
    ker = _cols_from(r, blocks)
    if len(ker) < n - i:
        return None
    if admissible:
        lead = [v for v in ker if v[0, 0] != 0]
        if not lead:
            return None
        others = [v for v in ker if v is not lead[0]]
        ker = [lead[0]] + others
    return _make_split(blocks, r, hstack(*ker[: n - i]), admissible)


def _split_2x2(blocks: list[Mat], admissible: bool) -> tuple[Split | None, bool]:
    """Exact decision for a 2x2 block; second value: split exists over an extension."""
    # a = (0, 1)
    extension = False
    for a in _candidate_rows_2x2(blocks):
        ker = _cols_from(a, blocks)
        for c in ker:
            if admissible and c[0, 0] == 0:
                continue
            s = _make_split(blocks, a, c, admissible)
            if s is not None:
                return s, False
    g = _minor_gcd(blocks)
    if g is not None and g.degree() >= 2 and not _rational_roots(g):
        extension = True
    return None, extension


def _minor_gcd(blocks: list[Mat]):
    """gcd of the 2x2 minors of the rows ``(1, t) B_l`` as a polynomial in ``t``."""
    rows = []
    for b in blocks:
        r0 = flint.fmpq_poly([b.flint[0, 0], b.flint[1, 0]])
        r1 = flint.fmpq_poly([b.flint[0, 1], b.flint[1, 1]])
        rows.append((r0, r1))
    g = flint.fmpq_poly(0)
    for (a0, a1), (b0, b1) in combinations(rows, 2):
        g = g.gcd(a0 * b1 - a1 * b0)
    return None if g == 0 else g


def _rational_roots(p) -> list[Fraction]:
    out = []
    _, factors = p.factor()
    for f, _mult in factors:
        if f.degree() == 1:
            c = f.coeffs()
            root = -c[0] / c[1]
            out.append(Fraction(int(root.p), int(root.q)))
    return sorted(set(out))


def _candidate_rows_2x2(blocks: list[Mat]):
    yield Mat.row([0, 1])
    g = _minor_gcd(blocks)
    if g is None:
        yield Mat.row([1, 0])
        return
    for t in _rational_roots(g):
        yield Mat.row([1, t])


def search_block_split(blocks: list[Mat], admissible: bool = False) -> tuple[Split | None, str, bool]:
    """Search a lower-left zero block for one pivot block.

    ``blocks`` are the ``d + 1`` coefficient slices; ``admissible`` requires
    the column transformation to keep first row ``e_1`` (block 1).  Returns
    ``(split, status, splits_over_extension)``; the smallest ``i`` wins.
    """
    n = blocks[0].rows
    if n < 2:
        return None, CERTIFIED, False
    if n == 2:
        s, ext = _split_2x2(blocks, admissible)
        return (s, SPLIT, False) if s else (None, CERTIFIED, ext)
    found = _module_split(blocks, admissible)
    if isinstance(found, Split):
        return found, SPLIT, False
    if found is _IRREDUCIBLE:
        return None, CERTIFIED, False
    for i in range(1, n):
        s = _search_size(blocks, i, admissible)
        if s is not None:
            return s, SPLIT, False
    return None, HEURISTIC, False


_IRREDUCIBLE = object()


def _invertible_combination(blocks: list[Mat], rng: random.Random) -> Mat | None:
    n = blocks[0].rows
    if invert_scalar(blocks[0]) is not None:
        return blocks[0]
    for _ in range(PENCIL_POINTS):
        c = Mat.zeros(n, n)
        for b in blocks:
            c = c + b.scale(rng.randint(-3, 3))
        if invert_scalar(c) is not None:
            return c
    return None


def _spin(start: Mat, ops: list[Mat]) -> Mat:
    """Column basis of the smallest ``ops``-invariant subspace containing ``start``."""
    basis = [start]
    queue = [start]
    while queue and len(basis) < start.rows:
        v = queue.pop()
        for op in ops:
            w = op @ v
            if rank(hstack(*basis, w)) > len(basis):
                basis.append(w)
                queue.append(w)
    return hstack(*basis)


def _poly_at(g, m: Mat) -> Mat:
    n = m.rows
    out = Mat.zeros(n, n)
    for c in reversed(g.coeffs()):
        out = out @ m + Mat.identity(n).scale(Fraction(int(c.p), int(c.q)))
    return out


def _invariant_subspace(ops: list[Mat], rng: random.Random):
    """A proper invariant subspace (as columns), ``_IRREDUCIBLE``, or ``None``."""
    n = ops[0].rows
    for _ in range(MEATAXE_TRIES):
        theta = Mat.zeros(n, n)
        for op in ops:
            theta = theta + op.scale(rng.randint(-3, 3))
        a, b = rng.choice(ops), rng.choice(ops)
        theta = theta + (a @ b).scale(rng.randint(-2, 2))
        _, factors = theta.flint.charpoly().factor()
        for g, _mult in sorted(factors, key=lambda f: f[0].degree()):
            gm = _poly_at(g, theta)
            ker = nullspace(gm)
            if not ker:
                continue
            span = _spin(ker[0], ops)
            if span.cols < n:
                return span
            if len(ker) == g.degree():
                # Norton: every vector of ker g(theta) spins to everything, so a
                # proper submodule would show up in the dual
                dual = nullspace(gm.transpose())
                tspan = _spin(dual[0], [op.transpose() for op in ops])
                if tspan.cols < n:
                    return hstack(*nullspace(tspan.transpose()))
                return _IRREDUCIBLE
    return None


def _irreducible_submodule(ops: list[Mat], rng: random.Random) -> Mat | None:
    """Basis of an irreducible submodule (the whole space if irreducible)."""
    n = ops[0].rows
    found = _invariant_subspace(ops, rng)
    if found is None:
        return None
    if found is _IRREDUCIBLE:
        return Mat.identity(n)
    # action restricted to the submodule, in its own basis
    restricted = [solve(found, op @ found)[0] for op in ops]
    sub = _irreducible_submodule(restricted, rng)
    return None if sub is None else found @ sub


def _module_split(blocks: list[Mat], admissible: bool):
    """``Split``, ``_IRREDUCIBLE`` or ``None`` (undecided) via invariant subspaces.

    The column space ``C`` is taken maximal (the annihilator of an irreducible
    submodule of the dual), so the zero block has as few rows as possible.
    """
    n = blocks[0].rows
    rng = random.Random(n)
    bc = _invertible_combination(blocks, rng)
    if bc is None:
        return None
    inv = invert_scalar(bc)
    ops = [inv @ b for b in blocks]
    dual = _irreducible_submodule([op.transpose() for op in ops], rng)
    if dual is None:
        return None
    if dual.cols == n:
        return _IRREDUCIBLE
    c = hstack(*nullspace(dual.transpose()))
    r = vstack(*left_nullspace(bc @ c))
    return _make_split(blocks, r, c, admissible)


def _search_size(blocks: list[Mat], i: int, admissible: bool) -> Split | None:
    n = blocks[0].rows
    limit = max(4, min(MAX_SEEDS, SEED_BUDGET // (n - 1)))
    seeds = 0
    for rows in combinations(range(n), i):
        if seeds >= limit:
            break
        seeds += 1
        r = vstack(*[Mat.unit_row(n, j) for j in rows])
        s = _alternate(blocks, r, i, admissible)
        if s is not None:
            return s
    seeds = 0
    for cols in combinations(range(n), n - i):
        if seeds >= limit:
            break
        seeds += 1
        c = hstack(*[Mat.unit_column(n, j) for j in cols])
        rws = _rows_from(c, blocks)
        if len(rws) >= i:
            s = _make_split(blocks, vstack(*rws[:i]), c, admissible)
            if s is not None:
                return s
            s = _alternate(blocks, vstack(*rws[:i]), i, admissible)
            if s is not None:
                return s
    return None


def _alternate(blocks: list[Mat], r: Mat, i: int, admissible: bool) -> Split | None:
    n = blocks[0].rows
    for _ in range(MAX_ALTERNATIONS):
        s = _try_rows(blocks, r, i, admissible)
        if s is not None:
            return s
        ker = _cols_from(r, blocks)
        if not ker:
            return None
        rws = _rows_from(hstack(*ker), blocks)
        if len(rws) < i:
            return None
        nr = vstack(*rws[:i])
        if nr == r:
            return None
        r = nr
    return None


def _block_slices(a: ALS, idx: range) -> list[Mat]:
    return [c.submatrix(idx, idx) for c in a.coeffs]


def refine(a: ALS) -> tuple[ALS, RefinementReport]:
    """Split pivot blocks until the search finds nothing more."""
    report = RefinementReport()
    if a.n == 0:
        return a, report
    checked: dict[tuple, BlockStatus] = {}
    while True:
        ps = pivot_structure(a)
        changed = False
        for k in range(1, ps.m + 1):
            idx = ps.block_range(k)
            if len(idx) < 2:
                continue
            slices = _block_slices(a, idx)
            key = (idx.start, len(idx), tuple(slices))
            if key in checked:
                continue
            split, status, ext = search_block_split(slices, admissible=(k == 1))
            if split is None:
                checked[key] = BlockStatus(idx.start, len(idx), status, None, ext)
                continue
            n = a.n
            p = _embed_block(n, idx, split.t)
            q = _embed_block(n, idx, split.u)
            t = Transformation(p, q)
            if not t.admissible:
                raise RuntimeError("refinement produced a non-admissible transformation")
            a = apply_transformation(a, t, check=False)
            report.blocks.append(BlockStatus(idx.start, len(idx), SPLIT, split))
            changed = True
            break
        if not changed:
            break
    ps = pivot_structure(a)
    final = []
    for k in range(1, ps.m + 1):
        idx = ps.block_range(k)
        if len(idx) < 2:
            final.append(BlockStatus(idx.start, 1, CERTIFIED))
            continue
        key = (idx.start, len(idx), tuple(_block_slices(a, idx)))
        final.append(checked[key])
    report.blocks.extend(final)
    return a, report


def _embed_block(n: int, idx: range, m: Mat) -> Mat:
    items = [(i, i, 1) for i in range(n) if i not in idx]
    ent = m.entries()
    w = m.cols
    for a, p in enumerate(idx):
        for b, q in enumerate(idx):
            if ent[a * w + b]:
                items.append((p, q, ent[a * w + b]))
    return Mat.from_sparse(n, n, items)
