"""Scalar expression language for profile curves and curve components.

Grammar (ASCII only)::

    expr    := term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := '-' factor | power
    power   := atom ('^' factor)?          right-associative
    atom    := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

``^`` binds tighter than unary minus, so ``-x^2`` parses as ``-(x^2)``
while an exponent may still carry a sign (``x^-2``).  Supported
functions: sin, cos, exp, log, sqrt.  Exactly one free variable is
allowed per expression: the first NAME that is not a function becomes
the variable, any further distinct NAME is an error.

Evaluation propagates order-2 truncated Taylor data (value, first and
second derivative) through every node, so derivatives are exact to
roundoff.  There is no simplification and no symbolic differentiation;
expressions are evaluated as parsed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

__all__ = [
    "ParseError",
    "DomainError",
    "ExprAst",
    "Const",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "Jet2Scalar",
    "parse",
    "to_source",
    "eval_jet2",
    "eval_value",
    "fd_jet2",
]

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt")


class ParseError(ValueError):
    """Malformed expression; ``offset`` is the byte position of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class DomainError(ArithmeticError):
    """Evaluation left the mathematical domain (log(-1), 1/0, ...)."""


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "ExprAst"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "ExprAst"
    right: "ExprAst"


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "ExprAst"


ExprAst = Union[Const, Var, Neg, BinOp, Call]


# ---------------------------------------------------------------------------
# tokenizer / parser

_OPS = set("+-*/^()")


def _tokenize(source: str):
    tokens = []  # (kind, text, offset)
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _OPS:
            tokens.append(("op", ch, i))
            i += 1
            continue
        if ch.isdigit() or ch == ".":
            j = i
            seen_dot = False
            while j < n and (source[j].isdigit() or (source[j] == "." and not seen_dot)):
                seen_dot = seen_dot or source[j] == "."
                j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            try:
                value = float(text)
            except ValueError:
                raise ParseError(f"bad number literal {text!r}", i) from None
            tokens.append(("num", value, i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(("name", source[i:j], i))
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0
        self.variable = None  # fixed by first non-function name

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op):
        kind, text, off = self.peek()
        if kind != "op" or text != op:
            raise ParseError(f"expected {op!r}", off)
        self.next()

    def parse_expr(self):
        node = self.parse_term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.next()
                node = BinOp(text, node, self.parse_term())
            else:
                return node

    def parse_term(self):
        node = self.parse_factor()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.next()
                node = BinOp(text, node, self.parse_factor())
            else:
                return node

    def parse_factor(self):
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.next()
            return Neg(self.parse_factor())
        return self.parse_power()

    def parse_power(self):
        node = self.parse_atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.next()
            return BinOp("^", node, self.parse_factor())
        return node

    def parse_atom(self):
        kind, text, off = self.next()
        if kind == "num":
            return Const(text)
        if kind == "name":
            nk, nt, _ = self.peek()
            if text in FUNCTIONS:
                if nk == "op" and nt == "(":
                    self.next()
                    arg = self.parse_expr()
                    self.expect_op(")")
                    return Call(text, arg)
                raise ParseError(f"function {text!r} needs an argument list", off)
            if self.variable is None:
                self.variable = text
            elif text != self.variable:
                raise ParseError(f"unknown identifier {text!r}", off)
            return Var(text)
        if kind == "op" and text == "(":
            node = self.parse_expr()
            self.expect_op(")")
            return node
        raise ParseError("syntax error", off)


def parse(source: str) -> ExprAst:
    """Parse ``source`` into an immutable AST.

    Raises :class:`ParseError` with the byte offset on malformed input or
    on a second distinct identifier.
    """
    if not source or not source.strip():
        raise ParseError("empty expression", 0)
    if not source.isascii():
        raise ParseError("expressions must be ASCII", 0)
    parser = _Parser(_tokenize(source))
    node = parser.parse_expr()
    kind, _, off = parser.peek()
    if kind != "end":
        raise ParseError("syntax error", off)
    return node


def _fmt_number(v: float) -> str:
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def to_source(ast: ExprAst) -> str:
    """Render an AST back to source; parse(to_source(a)) == a."""
    # precedence levels: +,- = 1; *,/ = 2; unary - = 3; ^ = 4; atom = 5
    def go(node, parent_prec):
        if isinstance(node, Const):
            if node.value < 0:
                s = f"-{_fmt_number(-node.value)}"
                return f"({s})" if parent_prec > 3 else s
            return _fmt_number(node.value)
        if isinstance(node, Var):
            return node.name
        if isinstance(node, Call):
            return f"{node.fn}({go(node.arg, 0)})"
        if isinstance(node, Neg):
            s = f"-{go(node.arg, 3)}"
            return f"({s})" if parent_prec > 3 else s
        if isinstance(node, BinOp):
            if node.op in "+-":
                prec, lp, rp = 1, 1, 2
            elif node.op in "*/":
                prec, lp, rp = 2, 2, 3
            else:  # ^ right-associative, exponent may be a signed factor
                prec, lp, rp = 4, 5, 3
            s = f"{go(node.left, lp)}{node.op}{go(node.right, rp)}"
            return f"({s})" if parent_prec > prec else s
        raise TypeError(f"not an AST node: {node!r}")

    return go(ast, 0)


# ---------------------------------------------------------------------------
# order-2 jets

@dataclass(frozen=True)
class Jet2Scalar:
    """Value with first and second derivative at a point."""

    value: float
    d1: float
    d2: float

    def __add__(self, other):
        o = _as_jet(other)
        return Jet2Scalar(self.value + o.value, self.d1 + o.d1, self.d2 + o.d2)

    __radd__ = __add__

    def __neg__(self):
        return Jet2Scalar(-self.value, -self.d1, -self.d2)

    def __sub__(self, other):
        o = _as_jet(other)
        return Jet2Scalar(self.value - o.value, self.d1 - o.d1, self.d2 - o.d2)

    def __rsub__(self, other):
        return _as_jet(other) - self

    def __mul__(self, other):
        o = _as_jet(other)
        return Jet2Scalar(
            self.value * o.value,
            self.d1 * o.value + self.value * o.d1,
            self.d2 * o.value + 2.0 * self.d1 * o.d1 + self.value * o.d2,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _as_jet(other)
        if o.value == 0.0:
            raise DomainError("division by zero")
        w = 1.0 / o.value
        q = self.value * w
        d1 = (self.d1 - q * o.d1) * w
        d2 = (self.d2 - 2.0 * d1 * o.d1 - q * o.d2) * w
        return Jet2Scalar(q, d1, d2)

    def __rtruediv__(self, other):
        return _as_jet(other) / self


def _as_jet(x) -> Jet2Scalar:
    if isinstance(x, Jet2Scalar):
        return x
    return Jet2Scalar(float(x), 0.0, 0.0)


def _jet_pow(base: Jet2Scalar, expo: Jet2Scalar) -> Jet2Scalar:
    if expo.d1 == 0.0 and expo.d2 == 0.0:
        p = expo.value
        if p == 0.0:
            return Jet2Scalar(1.0, 0.0, 0.0)
        is_int = p == round(p)
        if base.value == 0.0:
            if not is_int or p < 0:
                raise DomainError("0 raised to a non-positive-integer power")
            if p == 1.0:
                return base
            if p == 2.0:
                return Jet2Scalar(0.0, 0.0, 2.0 * base.d1 * base.d1)
            # p >= 3 integer: value and both derivatives vanish
            return Jet2Scalar(0.0, 0.0, 0.0)
        if base.value < 0.0 and not is_int:
            raise DomainError("negative base with fractional exponent")
        v = base.value ** p
        f1 = p * base.value ** (p - 1.0)
        f2 = p * (p - 1.0) * base.value ** (p - 2.0)
        return Jet2Scalar(v, f1 * base.d1, f2 * base.d1 * base.d1 + f1 * base.d2)
    # variable exponent: b^e = exp(e*log(b)), requires b > 0
    if base.value <= 0.0:
        raise DomainError("variable exponent requires a positive base")
    return _jet_exp(expo * _jet_log(base))


def _jet_sin(u: Jet2Scalar) -> Jet2Scalar:
    s, c = math.sin(u.value), math.cos(u.value)
    return Jet2Scalar(s, c * u.d1, -s * u.d1 * u.d1 + c * u.d2)


def _jet_cos(u: Jet2Scalar) -> Jet2Scalar:
    s, c = math.sin(u.value), math.cos(u.value)
    return Jet2Scalar(c, -s * u.d1, -c * u.d1 * u.d1 - s * u.d2)


def _jet_exp(u: Jet2Scalar) -> Jet2Scalar:
    try:
        e = math.exp(u.value)
    except OverflowError:
        raise DomainError("exp overflow") from None
    return Jet2Scalar(e, e * u.d1, e * (u.d1 * u.d1 + u.d2))


def _jet_log(u: Jet2Scalar) -> Jet2Scalar:
    if u.value <= 0.0:
        raise DomainError("log of a non-positive value")
    w = 1.0 / u.value
    return Jet2Scalar(math.log(u.value), w * u.d1, -w * w * u.d1 * u.d1 + w * u.d2)


def _jet_sqrt(u: Jet2Scalar) -> Jet2Scalar:
    if u.value < 0.0:
        raise DomainError("sqrt of a negative value")
    if u.value == 0.0:
        if u.d1 == 0.0 and u.d2 == 0.0:
            return Jet2Scalar(0.0, 0.0, 0.0)
        raise DomainError("sqrt not differentiable at zero")
    r = math.sqrt(u.value)
    d1 = 0.5 * u.d1 / r
    return Jet2Scalar(r, d1, (0.5 * u.d2 - d1 * d1) / r)


_CALLS = {
    "sin": _jet_sin,
    "cos": _jet_cos,
    "exp": _jet_exp,
    "log": _jet_log,
    "sqrt": _jet_sqrt,
}


def eval_jet2(ast: ExprAst, x: float) -> Jet2Scalar:
    """Evaluate the expression and its first two derivatives at ``x``."""
    seed = Jet2Scalar(float(x), 1.0, 0.0)

    def go(node) -> Jet2Scalar:
        if isinstance(node, Const):
            return Jet2Scalar(node.value, 0.0, 0.0)
        if isinstance(node, Var):
            return seed
        if isinstance(node, Neg):
            return -go(node.arg)
        if isinstance(node, Call):
            return _CALLS[node.fn](go(node.arg))
        if isinstance(node, BinOp):
            if node.op == "^":
                return _jet_pow(go(node.left), go(node.right))
            left, right = go(node.left), go(node.right)
            if node.op == "+":
                return left + right
            if node.op == "-":
                return left - right
            if node.op == "*":
                return left * right
            return left / right
        raise TypeError(f"not an AST node: {node!r}")

    out = go(ast)
    if not (math.isfinite(out.value) and math.isfinite(out.d1) and math.isfinite(out.d2)):
        raise DomainError("non-finite result")
    return out


def eval_value(ast: ExprAst, x: float) -> float:
    return eval_jet2(ast, x).value


_EPS_CBRT = float(7.401486830834377e-06)  # cbrt(double epsilon)


def fd_jet2(ast: ExprAst, x: float, richardson: bool = False) -> Jet2Scalar:
    """Central-difference jet of the expression, for cross-checks.

    Step h = cbrt(eps)*(1+|x|).  With ``richardson`` the h and h/2
    stencils are extrapolated, killing the leading truncation term.
    """
    h = _EPS_CBRT * (1.0 + abs(x))

    def stencil(step):
        fp = eval_value(ast, x + step)
        fm = eval_value(ast, x - step)
        f0 = eval_value(ast, x)
        return (fp - fm) / (2.0 * step), (fp - 2.0 * f0 + fm) / (step * step)

    d1, d2 = stencil(h)
    if richardson:
        d1h, d2h = stencil(0.5 * h)
        d1 = (4.0 * d1h - d1) / 3.0
        d2 = (4.0 * d2h - d2) / 3.0
    return Jet2Scalar(eval_value(ast, x), d1, d2)
