from hypothesis import given, strategies as st

from freefield.als import XYZ
from freefield.poly import NCPoly


def p(d):
    return NCPoly.from_dict(XYZ, d)


x, y, z = (NCPoly.letter(XYZ, c) for c in "xyz")
one = NCPoly.constant(XYZ, 1)

polys = st.dictionaries(st.lists(st.integers(1, 3), max_size=3).map(tuple),
                        st.integers(-3, 3), max_size=4).map(p)


def test_rendering_is_length_then_lex():
    assert str(y - y * x * y) == "y - y*x*y"
    assert str(y * x * y * (-1) + y) == "y - y*x*y"
    assert str(one - x * y) == "1 - x*y"
    assert str(NCPoly.zero(XYZ)) == "0"


def test_noncommutative():
    assert x * y != y * x


def test_gcd_example_factorizations():
    assert y * x * (one - y * x) * z == y * x * z - y * x * y * x * z
    assert y * (one - x * y) * y == y * y - y * x * y * y


@given(polys, polys, polys)
def test_ring_laws(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a
    assert (a - a).is_zero


@given(polys, polys)
def test_reversal_is_anti_homomorphism(a, b):
    assert (a * b).reversed() == b.reversed() * a.reversed()


def test_degree_and_normalization():
    q = (y * 2 - y * x * y * 2)
    assert q.degree == 3
    assert str(q.normalized()) == "y - y*x*y"
    assert (x ** 3) == x * x * x
