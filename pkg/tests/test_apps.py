import time
from fractions import Fraction

import pytest

from freefield.als import XYZ
from freefield.apps import (ParanoiaError, check_identity, disjoint, eq, is_left_factor, lgcd,
                            poly_from_als, rgcd)
from freefield.expr import compile_expr, to_poly
from freefield.ops import DivisionByZero
from freefield.poly import NCPoly

from conftest import GCD_P, GCD_Q, HUA_LHS
from oracles import frozen


def poly(text):
    return to_poly(text)


def from_frozen(d):
    letters = {"x": 1, "y": 2, "z": 3}
    return NCPoly.from_dict(XYZ, {tuple(letters[c] for c in w): Fraction(v) for w, v in d.items()})


@pytest.mark.parametrize("f,g,same", [
    (HUA_LHS, "x*y*x", True),
    ("x*y", "y*x", False),
    ("inv(inv(x))", "x", True),
    ("inv(x*y)", "inv(y)*inv(x)", True),
    ("inv(x*y)", "inv(x)*inv(y)", False),
    ("inv(1 - x*y)*x", "x*inv(1 - y*x)", True),
    ("inv(x) + inv(y)", "inv(x)*(x + y)*inv(y)", True),
])
def test_word_problem(f, g, same):
    assert eq(f, g) is same
    assert eq(f, g, paranoid=True) is same


def test_paranoia_error_is_an_assertion():
    assert issubclass(ParanoiaError, AssertionError)


def test_left_factors_against_reference_quotients():
    d = frozen()
    r = is_left_factor(poly("y"), poly("y - y*x*y"))
    assert r is not None
    assert poly_from_als(r) == from_frozen(d["quotient_y_into_y_minus_yxy"])
    r = is_left_factor(poly("1 - x*y"), poly("x - x*y*x"))
    assert poly_from_als(r) == from_frozen(d["quotient_1mxy_into_x_minus_xyx"])
    assert (is_left_factor(poly("x"), poly("y")) is not None) is d["x_divides_y"]


def test_left_factor_of_zero_divisor():
    with pytest.raises(DivisionByZero):
        is_left_factor("x - x", "y")


def test_right_factor_is_not_a_left_factor():
    assert is_left_factor(poly("x"), poly("y*x")) is None


@pytest.mark.parametrize("f,g,expected", [
    ("x", "y", False),          # both polynomials share the constant direction
    ("inv(x)", "inv(y)", True),
    ("x", "x", False),
    ("x*y", "x*z", False),
    ("inv(x)", "y", True),
])
def test_disjointness(f, g, expected):
    assert disjoint(f, g) is expected


def test_gcd_example():
    t = time.perf_counter()
    r = lgcd(GCD_P, GCD_Q)
    assert time.perf_counter() - t < 2
    assert r.gcd == poly("y - y*x*y")
    assert [str(f) for f in r.factors] == ["y", "1 - x*y"]
    assert r.intermediate_dim == 3
    assert r.glued_dim == 9
    assert r.verified and not r.example_grade
    cof = [from_frozen(c) for c in frozen()["gcd_example_cofactors"]]
    assert r.gcd * cof[0] == poly(GCD_P)
    assert r.gcd * cof[1] == poly(GCD_Q)


def test_gcd_of_monomials():
    r = lgcd("x*y", "x*z")
    assert str(r.gcd) == "x"
    q = [from_frozen(c) for c in frozen()["lgcd_xy_xz_quotients"]]
    assert r.gcd * q[0] == poly("x*y") and r.gcd * q[1] == poly("x*z")


def test_coprime_letters():
    assert not frozen()["y_z_common_left_factor_of_degree_1"]
    r = lgcd("y", "z")
    assert r.gcd.is_constant


def test_common_nonmonomial_factor():
    r = lgcd("(1 - x*y)*x", "(1 - x*y)*y")
    assert r.gcd == poly("1 - x*y")


def test_gcd_with_itself_is_marked_example_grade():
    p = poly(GCD_P)
    r = lgcd(p, p)
    assert r.gcd == p.normalized()
    assert r.verified
    assert r.example_grade


@pytest.mark.parametrize("p,q", [("x*y", "x*z"), (GCD_P, GCD_Q), ("(1 - x*y)*x", "(1 - x*y)*y")])
def test_gcd_is_symmetric(p, q):
    assert lgcd(p, q).gcd == lgcd(q, p).gcd


def test_right_gcd_is_the_mirror_image():
    p, q = poly(GCD_P).reversed(), poly(GCD_Q).reversed()
    r = rgcd(p, q)
    assert r.gcd == poly("y - y*x*y").reversed()
    assert [str(f) for f in r.factors] == ["1 - y*x", "y"]
    assert str(rgcd("y*x", "z*x").gcd) == "x"


def test_gcd_rejects_constants():
    with pytest.raises(ValueError):
        lgcd("1", "x")


def test_identity_checking():
    lines = [
        "# Hua",
        f"{HUA_LHS} == x*y*x",
        "x*y == y*x   # false",
        "",
        "inv(x - x) == 0",
        "x == == y",
        "x + == y",
    ]
    verdicts = check_identity(lines)
    assert [(v.line, v.verdict) for v in verdicts] == [
        (2, "true"), (3, "false"), (5, "undefined"), (6, "error"), (7, "error")]
    assert verdicts[0].render() == "2: true (ranks 4, 4)"
    assert verdicts[1].render() == "3: false (ranks 3, 3)"
    assert "left side" in verdicts[2].message


def test_polynomial_read_back():
    assert poly_from_als(compile_expr("x*y - 2")) == poly("x*y - 2")
    assert poly_from_als(compile_expr("inv(x)")) is None
