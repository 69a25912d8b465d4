"""Rational expressions: parsing, direct matrix evaluation and compilation to ALS.

Grammar (juxtaposition multiplies, ``^-1`` and ``inv()`` are synonyms)::

    expr   := ['-'] term (('+' | '-') term)*
    term   := factor (['*'] factor)*
    factor := base ['^' ['-'] int]
    base   := rational | letter | '(' expr ')' | 'inv' '(' expr ')'

A leading minus negates the first term only, so ``-x + y`` is ``(-x) + y``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .als import ALS, Alphabet, XYZ
from .linalg import Mat, format_rat, invert_scalar
from .ops import DivisionByZero, add, invert, monomial_als, mul, scalar_als, scalar_mul
from .poly import NCPoly

__all__ = [
    "Expr", "Scalar", "Letter", "Neg", "Add", "Sub", "Mul", "Inv", "Pow",
    "ExprSyntaxError", "UndefinedElement", "parse_expr", "compile_expr", "eval_expr", "to_poly",
]


class Expr:
    """Base class of the expression tree."""

    def __str__(self) -> str:
        return _render(self, 0)


@dataclass(frozen=True, eq=True)
class Scalar(Expr):
    value: Fraction


@dataclass(frozen=True, eq=True)
class Letter(Expr):
    index: int      # 1-based position in the alphabet
    name: str


@dataclass(frozen=True, eq=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True, eq=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Inv(Expr):
    arg: Expr


@dataclass(frozen=True, eq=True)
class Pow(Expr):
    base: Expr
    exponent: int


def _render(e: Expr, prec: int) -> str:
    # precedences: 1 sum, 2 product, 3 power/atom
    if isinstance(e, Scalar):
        s = format_rat(e.value)
        return f"({s})" if (e.value < 0 or "/" in s) and prec >= 2 else s
    if isinstance(e, Letter):
        return e.name
    if isinstance(e, Neg):
        s = "-" + _render(e.arg, 2)
        return f"({s})" if prec >= 1 else s
    if isinstance(e, (Add, Sub)):
        op = " + " if isinstance(e, Add) else " - "
        s = _render(e.left, 1) + op + _render(e.right, 2)
        return f"({s})" if prec >= 2 else s
    if isinstance(e, Mul):
        s = _render(e.left, 2) + "*" + _render(e.right, 3)
        return f"({s})" if prec >= 3 else s
    if isinstance(e, Inv):
        return f"inv({_render(e.arg, 0)})"
    if isinstance(e, Pow):
        return f"{_render(e.base, 3)}^{e.exponent}"
    raise TypeError(f"not an expression node: {e!r}")


class ExprSyntaxError(ValueError):
    """Syntax error with a 0-based character offset."""

    def __init__(self, message: str, position: int, text: str = ""):
        super().__init__(f"column {position + 1}: {message}")
        self.position = position
        self.text = text


class UndefinedElement(DivisionByZero):
    """Inversion of a subexpression that evaluates to zero."""

    def __init__(self, sub: Expr):
        super().__init__(f"division by zero element: inv({sub})")
        self.expr = sub


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*^()]))")


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {text[bad]!r}", bad, text)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, alphabet: Alphabet):
        self.text = text
        self.alphabet = alphabet
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg: str, tok=None):
        tok = tok or self.peek()
        raise ExprSyntaxError(msg, tok[2], self.text)

    def expect(self, value: str):
        t = self.next()
        if t[1] != value:
            self.error(f"expected {value!r}", t)

    def parse(self) -> Expr:
        if self.peek()[0] == "end":
            self.error("empty expression")
        e = self.expr()
        if self.peek()[0] != "end":
            self.error(f"unexpected {self.peek()[1]!r}")
        return e

    def expr(self) -> Expr:
        if self.peek()[1] == "-":
            self.next()
            e: Expr = Neg(self.term())
        else:
            e = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.next()[1]
            rhs = self.term()
            e = Add(e, rhs) if op == "+" else Sub(e, rhs)
        return e

    def _starts_factor(self) -> bool:
        kind, val, _ = self.peek()
        return kind in ("num", "id") or val == "("

    def term(self) -> Expr:
        e = self.factor()
        while True:
            if self.peek()[1] == "*":
                self.next()
                e = Mul(e, self.factor())
            elif self._starts_factor():
                e = Mul(e, self.factor())
            else:
                return e

    def factor(self) -> Expr:
        b = self.base()
        if self.peek()[1] == "^":
            self.next()
            sign = 1
            if self.peek()[1] == "-":
                self.next()
                sign = -1
            t = self.next()
            if t[0] != "num" or "/" in t[1]:
                self.error("exponent must be an integer", t)
            return _desugar_pow(b, sign * int(t[1]))
        return b

    def base(self) -> Expr:
        kind, val, pos = self.peek()
        if kind == "num":
            tok = self.next()
            p, _, q = val.partition("/")
            if q and int(q) == 0:
                self.error("zero denominator", tok)
            return Scalar(Fraction(int(p), int(q) if q else 1))
        if val == "(":
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        if kind == "id":
            self.next()
            if val == "inv":
                self.expect("(")
                e = self.expr()
                self.expect(")")
                return Inv(e)
            return self.letters(val, pos)
        self.error(f"unexpected {val!r}" if val else "unexpected end of input")

    def letters(self, name: str, pos: int) -> Expr:
        if name in self.alphabet.letters:
            return Letter(self.alphabet.index(name), name)
        # juxtaposed single-character letters such as "xy"
        if all(ch in self.alphabet.letters for ch in name):
            out: Expr = Letter(self.alphabet.index(name[0]), name[0])
            for ch in name[1:]:
                out = Mul(out, Letter(self.alphabet.index(ch), ch))
            return out
        raise ExprSyntaxError(f"undeclared letter {name!r}", pos, self.text)


def _desugar_pow(b: Expr, k: int) -> Expr:
    if k == 0:
        return Scalar(Fraction(1))
    out = b
    for _ in range(abs(k) - 1):
        out = Mul(out, b)
    return Inv(out) if k < 0 else out


def parse_expr(text: str, alphabet: Alphabet = XYZ) -> Expr:
    return _Parser(text, alphabet).parse()


def _as_expr(e, alphabet: Alphabet) -> Expr:
    return parse_expr(e, alphabet) if isinstance(e, str) else e


def compile_expr(e: Expr | str, alphabet: Alphabet = XYZ, lazy: bool = False) -> ALS:
    """Bottom-up construction.  Eager mode minimizes after every node; lazy
    mode only at the root (inversion always minimizes its operand, which is
    also how a zero operand is detected)."""
    from .minimize import minimize
    e = _as_expr(e, alphabet)

    def fin(a: ALS) -> ALS:
        return a if lazy else minimize(a)[0]

    def go(x: Expr) -> ALS:
        if isinstance(x, Scalar):
            return scalar_als(alphabet, x.value)
        if isinstance(x, Letter):
            if x.index > alphabet.d or alphabet.letters[x.index - 1] != x.name:
                raise ValueError(f"letter {x.name!r} is not in the alphabet")
            return monomial_als(alphabet, (x.index,))
        if isinstance(x, Neg):
            return scalar_mul(go(x.arg), -1)
        if isinstance(x, Add):
            return fin(add(go(x.left), go(x.right)))
        if isinstance(x, Sub):
            return fin(add(go(x.left), scalar_mul(go(x.right), -1)))
        if isinstance(x, Mul):
            return fin(mul(go(x.left), go(x.right)))
        if isinstance(x, Inv):
            inner = minimize(go(x.arg))[0]
            if inner.n == 0:
                raise UndefinedElement(x.arg)
            return invert(inner, assume_minimal=True)
        if isinstance(x, Pow):
            return go(_desugar_pow(x.base, x.exponent))
        raise TypeError(f"not an expression node: {x!r}")

    out = go(e)
    return minimize(out)[0] if lazy else out


def eval_expr(e: Expr | str, mats: tuple[Mat, ...], alphabet: Alphabet = XYZ) -> Mat | None:
    """Evaluate directly at square matrices; ``None`` if some inverse does not exist."""
    e = _as_expr(e, alphabet)
    size = mats[0].rows

    def go(x: Expr) -> Mat | None:
        if isinstance(x, Scalar):
            return Mat.identity(size).scale(x.value)
        if isinstance(x, Letter):
            return mats[x.index - 1]
        if isinstance(x, Neg):
            a = go(x.arg)
            return None if a is None else -a
        if isinstance(x, (Add, Sub, Mul)):
            a = go(x.left)
            if a is None:
                return None
            b = go(x.right)
            if b is None:
                return None
            return a + b if isinstance(x, Add) else a - b if isinstance(x, Sub) else a @ b
        if isinstance(x, Inv):
            a = go(x.arg)
            return None if a is None else invert_scalar(a)
        if isinstance(x, Pow):
            return go(_desugar_pow(x.base, x.exponent))
        raise TypeError(f"not an expression node: {x!r}")

    return go(e)


def to_poly(e: Expr | str, alphabet: Alphabet = XYZ) -> NCPoly:
    """Expand an inverse-free expression (inverses of nonzero scalars allowed)."""
    e = _as_expr(e, alphabet)

    def go(x: Expr) -> NCPoly:
        if isinstance(x, Scalar):
            return NCPoly.constant(alphabet, x.value)
        if isinstance(x, Letter):
            return NCPoly.monomial(alphabet, (x.index,))
        if isinstance(x, Neg):
            return -go(x.arg)
        if isinstance(x, Add):
            return go(x.left) + go(x.right)
        if isinstance(x, Sub):
            return go(x.left) - go(x.right)
        if isinstance(x, Mul):
            return go(x.left) * go(x.right)
        if isinstance(x, Pow):
            return go(_desugar_pow(x.base, x.exponent))
        if isinstance(x, Inv):
            p = go(x.arg)
            if p.is_constant and not p.is_zero:
                return NCPoly.constant(alphabet, 1 / p.coeff(()))
            raise ValueError(f"not a polynomial: inv({x.arg})")
        raise TypeError(f"not an expression node: {x!r}")

    return go(e)
