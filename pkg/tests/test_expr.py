import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pinchlab.expr import (
    BinOp,
    Call,
    Const,
    DomainError,
    Neg,
    ParseError,
    Var,
    eval_jet2,
    fd_jet2,
    parse,
    to_source,
)


class TestParse:
    def test_mul_with_call(self):
        assert parse("u*cos(u)") == BinOp("*", Var("u"), Call("cos", Var("u")))

    def test_second_identifier_rejected(self):
        with pytest.raises(ParseError) as err:
            parse("a+b*c")
        assert "'b'" in str(err.value)
        assert err.value.offset == 2

    def test_malformed_operator(self):
        with pytest.raises(ParseError) as err:
            parse("2*^x")
        assert err.value.offset == 2

    def test_empty(self):
        with pytest.raises(ParseError):
            parse("   ")

    def test_non_ascii(self):
        with pytest.raises(ParseError):
            parse("x²")

    def test_power_binds_tighter_than_unary_minus(self):
        assert parse("-x^2") == Neg(BinOp("^", Var("x"), Const(2.0)))

    def test_power_right_associative(self):
        assert parse("x^2^3") == BinOp("^", Var("x"),
                                       BinOp("^", Const(2.0), Const(3.0)))

    def test_signed_exponent(self):
        assert parse("x^-2") == BinOp("^", Var("x"), Neg(Const(2.0)))

    def test_subtraction_left_associative(self):
        assert parse("x-1-2") == BinOp("-", BinOp("-", Var("x"), Const(1.0)),
                                       Const(2.0))

    def test_scientific_notation(self):
        assert parse("1.5e-3") == Const(1.5e-3)

    def test_function_without_parens(self):
        with pytest.raises(ParseError):
            parse("sin x")

    def test_unbalanced_parens(self):
        with pytest.raises(ParseError):
            parse("(x+1")


class TestJets:
    def test_sin_at_zero(self):
        j = eval_jet2(parse("sin(x)"), 0.0)
        assert (j.value, j.d1, j.d2) == (0.0, 1.0, 0.0)

    def test_square_at_three(self):
        j = eval_jet2(parse("x^2"), 3.0)
        assert (j.value, j.d1, j.d2) == (9.0, 6.0, 2.0)

    def test_rational(self):
        # f = 1/(1+x^2); by hand: f(1) = 1/2, f'(1) = -1/2,
        # f'' = (6x^2-2)/(1+x^2)^3 so f''(1) = 1/2
        j = eval_jet2(parse("1/(1+x^2)"), 1.0)
        assert abs(j.value - 0.5) < 1e-15
        assert abs(j.d1 + 0.5) < 1e-15
        assert abs(j.d2 - 0.5) < 1e-15

    def test_variable_exponent(self):
        # x^x: d1 = x^x (log x + 1), d2 = x^x ((log x + 1)^2 + 1/x)
        j = eval_jet2(parse("x^x"), 2.0)
        assert abs(j.value - 4.0) < 1e-12
        assert abs(j.d1 - 4.0 * (math.log(2.0) + 1.0)) < 1e-12
        assert abs(j.d2 - 4.0 * ((math.log(2.0) + 1.0) ** 2 + 0.5)) < 1e-12

    @pytest.mark.parametrize("source,x", [
        ("log(x)", -1.0),
        ("sqrt(x)", -2.0),
        ("1/x", 0.0),
        ("x^0.5", -1.0),
        ("exp(x)", 1000.0),
    ])
    def test_domain_errors(self, source, x):
        with pytest.raises(DomainError):
            eval_jet2(parse(source), x)


# ---------------------------------------------------------------------------
# randomized cross-checks against central differences

_FUNCS = ("sin", "cos", "exp", "log", "sqrt")


def _random_ast(rng, depth):
    roll = rng.random()
    if depth == 0 or roll < 0.22:
        if rng.random() < 0.5:
            return Var("x")
        return Const(round(float(rng.uniform(-2.0, 2.0)), 4))
    if roll < 0.38:
        return Call(_FUNCS[int(rng.integers(0, len(_FUNCS)))],
                    _random_ast(rng, depth - 1))
    if roll < 0.46:
        return Neg(_random_ast(rng, depth - 1))
    if roll < 0.54:
        return BinOp("^", _random_ast(rng, depth - 1),
                     Const(float(rng.integers(0, 4))))
    op = "+-*/"[int(rng.integers(0, 4))]
    return BinOp(op, _random_ast(rng, depth - 1), _random_ast(rng, depth - 1))


def test_jets_match_finite_differences_bulk():
    rng = np.random.default_rng(20240901)
    checked = 0
    trials = 0
    while checked < 1000 and trials < 20000:
        trials += 1
        ast = _random_ast(rng, int(rng.integers(1, 7)))
        x = float(rng.uniform(-1.5, 1.5))
        try:
            j = eval_jet2(ast, x)
            if max(abs(j.value), abs(j.d1), abs(j.d2)) > 1e6:
                continue
            fd = fd_jet2(ast, x, richardson=True)
        except DomainError:
            continue
        assert abs(j.d1 - fd.d1) <= 1e-6 * (1.0 + abs(j.d1)), to_source(ast)
        assert abs(j.d2 - fd.d2) <= 1e-4 * (1.0 + abs(j.d2)), to_source(ast)
        checked += 1
    assert checked == 1000


# hypothesis strategy mirroring what parse() can produce (constants are
# nonnegative at the node level; minus is always the unary node)
_ast_strategy = st.recursive(
    st.one_of(
        st.just(Var("x")),
        st.builds(Const, st.floats(0.0, 4.0, allow_nan=False).map(lambda v: round(v, 3))),
    ),
    lambda children: st.one_of(
        st.builds(Neg, children),
        st.builds(Call, st.sampled_from(_FUNCS), children),
        st.builds(BinOp, st.sampled_from("+-*/^"), children, children),
    ),
    max_leaves=24,
)


@settings(max_examples=300, deadline=None)
@given(_ast_strategy)
def test_print_parse_round_trip(ast):
    assert parse(to_source(ast)) == ast


@settings(max_examples=200, deadline=None)
@given(st.floats(-1.4, 1.4))
def test_reparse_stability_on_source(x):
    source = "x*cos(x) - sin(x)/(2+x^2) + exp(-x^2)"
    ast = parse(source)
    assert parse(to_source(ast)) == ast
    j = eval_jet2(ast, x)
    fd = fd_jet2(ast, x, richardson=True)
    assert abs(j.d1 - fd.d1) <= 1e-6 * (1.0 + abs(j.d1))
    assert abs(j.d2 - fd.d2) <= 1e-4 * (1.0 + abs(j.d2))
