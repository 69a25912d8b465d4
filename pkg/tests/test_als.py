import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from freefield.als import (ALS, ALSFormatError, Alphabet, Transformation, XYZ, als_from_rows,
                           apply_transformation, cut_witness, empty_als, extend, mirror, parse_als,
                           pivot_structure, restrict, serialize, validate)
from freefield.linalg import Mat, invert_scalar
from freefield.ops import monomial_als
from freefield.oracle import prob_eq, series_coeffs

from conftest import f_plus_3z_system, inverse_product_system


def random_als(rng: random.Random, n: int, alphabet=XYZ) -> ALS:
    """Upper triangular pencil with unit diagonal plus a little noise below."""
    coeffs = []
    for idx in range(alphabet.d + 1):
        rows = []
        for i in range(n):
            r = []
            for j in range(n):
                if idx == 0 and i == j:
                    r.append(Fraction(1))
                elif j > i and rng.random() < 0.4:
                    r.append(Fraction(rng.randint(-3, 3), rng.randint(1, 2)))
                else:
                    r.append(Fraction(0))
            rows.append(r)
        coeffs.append(Mat.from_rows(rows))
    v = Mat.column([rng.randint(-2, 2) for _ in range(n - 1)] + [1])
    return ALS.build(alphabet, coeffs, v)


def test_empty_system_is_valid_zero():
    d = validate(empty_als(XYZ))
    assert d.ok and d.represents_zero


def test_non_admissible_is_reported():
    a = monomial_als(XYZ, (1,))
    bad = a.replace(u=Mat.row([0, 1]))
    d = validate(bad)
    assert not d.ok and "admissibility" in d.messages[0]


def test_pivot_sizes_of_worked_systems():
    assert pivot_structure(inverse_product_system()).sizes == (1, 2, 1)
    assert pivot_structure(f_plus_3z_system()).sizes == (2, 1, 1)


def test_cut_witness():
    a = f_plus_3z_system()
    assert cut_witness(a, 1) is not None      # entry -x at (2,1) blocks the cut
    assert cut_witness(a, 2) is None


def test_transformation_of_y_inverse_minus_x():
    a = als_from_rows([["y", "-y", "."], [".", "1", "-x"], [".", ".", "1"]], [1, 0, -1])
    t = Transformation(Mat.from_rows([[0, 1, 0], [1, 0, 1], [0, 0, 1]]),
                       Mat.from_rows([[1, 0, 0], [1, 1, 0], [0, 0, 1]]))
    expected = als_from_rows([["1", "1", "-x"], [".", "-y", "1"], [".", ".", "1"]], [0, 0, -1])
    assert apply_transformation(a, t) == expected


def test_non_admissible_transformation_rejected():
    a = monomial_als(XYZ, (1,))
    t = Transformation(Mat.identity(2), Mat.from_rows([[1, 1], [0, 1]]))
    with pytest.raises(ValueError):
        apply_transformation(a, t)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_admissible_transformations_preserve_the_element(seed, n):
    rng = random.Random(seed)
    a = random_als(rng, n)
    while True:
        p = Mat(n, n, [rng.randint(-2, 2) for _ in range(n * n)])
        q = Mat.from_rows([[int(j == 0) for j in range(n)]] +
                          [[rng.randint(-2, 2) for _ in range(n)] for _ in range(n - 1)])
        if invert_scalar(p) is not None and invert_scalar(q) is not None:
            break
    b = apply_transformation(a, Transformation(p, q))
    assert b.is_admissible
    assert prob_eq(a, b, seed=seed).verdict == "equal"


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 5))
def test_serialize_parse_roundtrip(seed, n):
    a = random_als(random.Random(seed), n)
    assert parse_als(serialize(a)) == a


def test_serialize_empty_roundtrip():
    e = empty_als(XYZ)
    assert parse_als(serialize(e)) == e


def test_text_format_comments_and_letters():
    text = """# x^-1 as a system
ALS 1
letters: a b
dim: 1
u: 1
v: 1
A0:
0
A[a]:
1
A[b]:
0
"""
    a = parse_als(text)
    assert a.alphabet == Alphabet(("a", "b")) and a.n == 1


@pytest.mark.parametrize("text,line", [
    ("ALS 2\n", 1),
    ("ALS 1\nletters: x\ndim: 1\nu: 1\nv: 1/0\n", 5),
    ("ALS 1\nletters: x\ndim: 2\nu: 1 0\nv: 0 1\nA0:\n1 0\n", 8),
    ("ALS 1\nletters: x x\n", 2),
])
def test_format_errors_carry_positions(text, line):
    with pytest.raises(ALSFormatError) as exc:
        parse_als(text)
    assert exc.value.line == line


def test_mirror_reverses_words():
    xy = monomial_als(XYZ, (1, 2))
    m = mirror(xy)
    assert m.is_admissible
    table = series_coeffs(_regular(m), 2)
    assert table[(2, 1)] == 1 and table[(1, 2)] == 0


def _regular(a):
    from freefield.ops import normalize_regular
    return normalize_regular(a)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_mirror_twice_is_identity_semantically(seed, n):
    a = random_als(random.Random(seed), n)
    assert prob_eq(mirror(mirror(a)), a, seed=seed).verdict == "equal"


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_extend_restrict_roundtrip(seed, n):
    a = random_als(random.Random(seed), n)
    e = extend(a)
    assert e.n == a.n and e.base.n == a.n + 1
    assert prob_eq(restrict(e), a, seed=seed).verdict == "equal"


def test_linear_form_rows():
    a = als_from_rows([["1", "-2x+1/3y"], [".", "1"]], [0, 1])
    assert a.coeffs[1][0, 1] == -2 and a.coeffs[2][0, 1] == Fraction(1, 3)
    with pytest.raises(ValueError):
        als_from_rows([["1", "2w"], [".", "1"]], [0, 1])
