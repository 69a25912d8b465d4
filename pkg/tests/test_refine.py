import random

from hypothesis import given, settings, strategies as st

from freefield.als import ALS, XYZ, als_from_rows, pivot_structure
from freefield.linalg import Mat, invert_scalar
from freefield.oracle import prob_eq
from freefield.refine import CERTIFIED, HEURISTIC, SPLIT, _search_size, refine, search_block_split

from conftest import refinement_system


def slices(rows):
    return list(als_from_rows(rows, [0] * (len(rows) - 1) + [1]).coeffs)


def test_middle_block_splits_by_a_column_swap():
    split, status, _ = search_block_split(slices([["y", "1"], ["1", "0"]]))
    assert status == SPLIT
    assert split.t == Mat.identity(2)
    assert split.u == Mat.from_rows([[0, 1], [1, 0]])
    assert split.i == 1


def test_refinement_gives_all_unit_blocks():
    a = refinement_system()
    r, report = refine(a)
    assert pivot_structure(r).sizes == (1, 1, 1, 1)
    assert len(report.splits) == 1
    assert report.fully_refined
    assert r.is_admissible
    assert prob_eq(r, a).verdict == "equal"


def test_block_splitting_only_over_an_extension():
    split, status, ext = search_block_split(slices([["1", "x"], ["2x", "1"]]))
    assert split is None
    assert status == CERTIFIED     # exact 2x2 decision over the rationals
    assert ext                     # t^2 = 1/2 has no rational root


def test_minimal_inverse_block_does_not_split():
    split, status, ext = search_block_split(slices([["1", "-y"], ["-x", "1"]]))
    assert split is None and status == CERTIFIED and not ext


def test_report_rendering():
    _, report = refine(refinement_system())
    text = report.render()
    assert "split" in text and "refined-certified" in text


def _hidden_triangular_block(rng, n, i):
    """Slices ``T^-1 B U^-1`` with ``B`` block upper triangular (zero lower-left ``i x (n-i)``)."""
    def rand(r, c):
        return Mat(r, c, [rng.randint(-2, 2) for _ in range(r * c)])
    while True:
        t, u = rand(n, n), rand(n, n)
        if invert_scalar(t) is not None and invert_scalar(u) is not None:
            break
    out = []
    for _ in range(XYZ.d + 1):
        b = rand(n, n)
        items = [(r, c, b[r, c]) for r in range(n) for c in range(n) if not (r >= n - i and c < n - i)]
        b = Mat.from_sparse(n, n, items)
        out.append(invert_scalar(t) @ b @ invert_scalar(u))
    return out


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.integers(3, 5))
def test_hidden_splits_are_found(seed, n):
    rng = random.Random(seed)
    i = rng.randint(1, n - 1)
    blocks = _hidden_triangular_block(rng, n, i)
    split, status, _ = search_block_split(blocks)
    assert status == SPLIT
    lower = range(n - split.i, n)
    left = range(n - split.i)
    for b in blocks:
        assert (split.t @ b @ split.u).submatrix(lower, left).is_zero()


def test_generic_block_is_certified_irreducible():
    rng = random.Random(1)
    blocks = [Mat(4, 4, [rng.randint(-3, 3) for _ in range(16)]) for _ in range(4)]
    split, status, _ = search_block_split(blocks)
    assert split is None and status == CERTIFIED


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_certified_blocks_defeat_the_seed_search(seed):
    rng = random.Random(seed)
    blocks = [Mat(3, 3, [rng.choice([0, 0, 1, -1, 2]) for _ in range(9)]) for _ in range(4)]
    split, status, _ = search_block_split(blocks)
    if status == CERTIFIED:
        assert all(_search_size(blocks, i, False) is None for i in (1, 2))
    elif status == SPLIT:
        lower, left = range(3 - split.i, 3), range(3 - split.i)
        assert all((split.t @ b @ split.u).submatrix(lower, left).is_zero() for b in blocks)


def test_singular_everywhere_block_falls_back_to_the_search():
    # skew-symmetric 3x3 pencil: singular at every scalar point
    blocks = slices([["0", "x", "y"], ["-x", "0", "z"], ["-y", "-z", "0"]])
    split, status, _ = search_block_split(blocks)
    assert split is None and status == HEURISTIC
