import random
from fractions import Fraction

import pytest

from freefield.als import XYZ, als_from_rows
from freefield.expr import Add, Inv, Letter, Mul, Neg, Scalar, Sub, UndefinedElement, compile_expr

LETTERS = [Letter(1, "x"), Letter(2, "y"), Letter(3, "z")]

HUA_LHS = "x - inv(inv(x) + inv(inv(y) - x))"
GCD_P = "y*x*z - y*x*y*x*z"
GCD_Q = "y*y - y*x*y*y"


def random_expr(rng: random.Random, nodes: int):
    """Random tree with exactly ``nodes`` nodes over x, y, z."""
    if nodes <= 1:
        if rng.random() < 0.75:
            return rng.choice(LETTERS)
        return Scalar(Fraction(rng.choice([1, 2, -1, 3, -2, 1, 1, 1])))
    if nodes == 2:
        return rng.choice([Neg, Inv])(random_expr(rng, 1))
    op = rng.choice([Add, Sub, Mul, Mul, Inv, Neg])
    if op in (Inv, Neg):
        return op(random_expr(rng, nodes - 1))
    k = rng.randint(1, nodes - 2)
    return op(random_expr(rng, k), random_expr(rng, nodes - 1 - k))


def expression_corpus(count: int = 100, seed: int = 2024, max_nodes: int = 6):
    """Defined expressions only; inversions of zero are redrawn."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        e = random_expr(rng, rng.randint(1, max_nodes))
        try:
            compile_expr(e, XYZ)
        except UndefinedElement:
            continue
        out.append(e)
    return out


def subexpressions(e):
    for name in ("arg", "left", "right"):
        child = getattr(e, name, None)
        if child is not None:
            yield from subexpressions(child)
    yield e


@pytest.fixture(scope="session")
def corpus():
    return expression_corpus()


# systems displayed in the worked examples

def inverse_product_system():
    """Dim-4 system for x^-1 (1 - xy)^-1 x before minimization."""
    return als_from_rows([["x", "1", ".", "."],
                          [".", "y", "-1", "."],
                          [".", "-1", "x", "-x"],
                          [".", ".", ".", "1"]], [0, 0, 0, 1])


def f_plus_3z_system():
    """Sum of (y^-1 - x)^-1 and 3z as a dim-4 system."""
    return als_from_rows([["1", "-y", "-1", "."],
                          ["-x", "1", "x", "."],
                          [".", ".", "1", "-z"],
                          [".", ".", ".", "1"]], [0, 1, 0, 3])


def gcd_glued_system():
    """Dim-9 system for p^-1 q of the gcd example."""
    rows = [["z", "1", ".", ".", ".", ".", ".", ".", "."],
            [".", "x", "-1", ".", ".", ".", ".", ".", "."],
            [".", "-1", "y", "-1", ".", ".", ".", ".", "."],
            [".", ".", ".", "x", "-1", ".", ".", ".", "."],
            [".", ".", ".", ".", "y", "-y", ".", ".", "."],
            [".", ".", ".", ".", ".", "1", "-x", "1", "."],
            [".", ".", ".", ".", ".", ".", "1", "-y", "."],
            [".", ".", ".", ".", ".", ".", ".", "1", "y"],
            [".", ".", ".", ".", ".", ".", ".", ".", "1"]]
    return als_from_rows(rows, [0] * 8 + [1])


def gcd_minimal_system():
    return als_from_rows([["z", "1", "."], [".", "x", "y"], [".", ".", "1"]], [0, 0, 1])


def refinement_system():
    """Dim-4 system whose middle pivot block [[y,1],[1,0]] splits."""
    return als_from_rows([["1", "1", "x", "."],
                          [".", "y", "1", "."],
                          [".", "1", "0", "x"],
                          [".", ".", ".", "1"]], [0, 0, 0, 1])
