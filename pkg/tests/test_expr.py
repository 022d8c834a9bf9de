import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import fd_gradient, fd_hessian, random_expression, random_source
from warpcurv.expr import (
    ArityError,
    BinOp,
    DomainError,
    Expression,
    ExpressionError,
    Neg,
    Num,
    ParseError,
    UnknownIdentifierError,
    Var,
    constant,
    eval_jet2,
    eval_jet2_batch,
    evaluate,
    parse,
)


def val(src, point=(), coords=()):
    return float(evaluate(parse(src, coords), np.asarray(point, dtype=float))[0])


# -- parsing ---------------------------------------------------------------


def test_precedence_and_associativity():
    assert val("1 + 2 * 3") == 7
    assert val("2 ^ 3 ^ 2") == 512  # right-associative
    assert val("-2 ^ 2") == -4  # ^ binds tighter than unary minus
    assert val("2 ^ -1") == 0.5
    assert val("8 / 4 / 2") == 1  # left-associative
    assert val("10 - 3 - 2") == 5
    assert val("1.5e1 + .5") == 15.5


def test_tree_shape():
    e = parse("-x^2", ["x"])
    assert e.root == Neg(BinOp("^", Var("x"), Num(2.0)))


def test_functions_and_constants():
    assert val("sin(0) + cos(0) + exp(0) + log(1) + sqrt(4)") == pytest.approx(4.0)
    assert val("tanh(0) + sinh(0) + cosh(0) + tan(0)") == pytest.approx(1.0)
    assert val("x*y", [2, 3], ["x", "y"]) == 6


def test_free_vars_and_binding():
    e = parse("x + 1", ["x", "y"])
    assert e.free_vars == ("x",)
    assert not e.is_constant
    assert constant(3.0, ["x"]).is_constant
    b = e.bind(["y", "x"])
    assert val_expr(b, [5, 2]) == 3


def val_expr(e, p):
    return float(evaluate(e, np.asarray(p, dtype=float))[0])


def test_bind_rejects_missing_coordinate():
    with pytest.raises(ExpressionError):
        parse("x + y", ["x", "y"]).bind(["x"])


@pytest.mark.parametrize(
    "src, pos",
    [("sin(", 4), ("1 +", 3), ("(x", 2), ("x )", 2), ("2 $ 3", 2), ("", 0), ("3 4", 2)],
)
def test_parse_errors_report_offset(src, pos):
    with pytest.raises(ParseError) as info:
        parse(src, ["x"])
    assert info.value.position == pos


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError) as info:
        parse("x + q", ["x"])
    assert info.value.name == "q" and info.value.position == 4


def test_unknown_function_and_arity():
    with pytest.raises(UnknownIdentifierError):
        parse("foo(x)", ["x"])
    with pytest.raises(ArityError):
        parse("sin(x, x)", ["x"])
    with pytest.raises(ArityError):
        parse("cos()", ["x"])


@pytest.mark.parametrize(
    "src, point",
    [("log(x)", [0.0]), ("sqrt(x)", [-1.0]), ("1/x", [0.0]), ("x^0.5", [-2.0]), ("x^-1", [0.0]), ("x^x", [-1.0])],
)
def test_domain_errors(src, point):
    e = parse(src, ["x"])
    with pytest.raises(DomainError) as info:
        eval_jet2(e, point)
    assert info.value.point is not None
    with pytest.raises(ArithmeticError):
        evaluate(e, point)


def test_negative_base_integer_power_allowed():
    assert val("x^3", [-2], ["x"]) == -8
    j = eval_jet2(parse("x^3", ["x"]), [-2.0])
    assert j.gradient[0] == 12 and j.hessian[0, 0] == -12


# -- round trip ------------------------------------------------------------


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_round_trip(seed):
    rng = np.random.default_rng(seed)
    e = parse(random_source(rng, 4), ["x", "y", "z"])
    again = parse(str(e), ["x", "y", "z"])
    assert again.root == e.root


# -- jets --------------------------------------------------------------------


def test_jet_closed_forms():
    e = parse("x^2 * y + sin(x*y)", ["x", "y"])
    x, y = 0.7, -0.4
    j = eval_jet2(e, [x, y])
    c, s = math.cos(x * y), math.sin(x * y)
    assert j.value == pytest.approx(x * x * y + s)
    np.testing.assert_allclose(j.gradient, [2 * x * y + y * c, x * x + x * c], rtol=1e-14)
    H = [[2 * y - y * y * s, 2 * x + c - x * y * s], [2 * x + c - x * y * s, -x * x * s]]
    np.testing.assert_allclose(j.hessian, H, rtol=1e-13)


def test_variable_exponent():
    e = parse("x^y", ["x", "y"])
    x, y = 1.7, 0.6
    j = eval_jet2(e, [x, y])
    assert j.value == pytest.approx(x**y)
    np.testing.assert_allclose(j.gradient, [y * x ** (y - 1), x**y * math.log(x)], rtol=1e-13)


def test_batch_matches_single_point():
    rng = np.random.default_rng(3)
    e = random_expression(rng)
    pts = rng.uniform(-1, 1, (7, 3))
    batch = eval_jet2_batch(e, pts)
    for k, p in enumerate(pts):
        one = eval_jet2(e, p)
        assert one.value == batch.value[k]
        np.testing.assert_array_equal(one.gradient, batch.gradient[k])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_jets_match_finite_differences(seed):
    rng = np.random.default_rng(seed)
    e = random_expression(rng)
    p = rng.uniform(-1, 1, 3)
    j = eval_jet2(e, p)
    g = fd_gradient(e, p)
    H = fd_hessian(e, p)
    assert np.max(np.abs(j.gradient - g)) <= 1e-5 * max(1.0, np.max(np.abs(g)))
    assert np.max(np.abs(j.hessian - H)) <= 1e-5 * max(1.0, np.max(np.abs(H)))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_hessian_exactly_symmetric(seed):
    rng = np.random.default_rng(seed)
    e = random_expression(rng)
    j = eval_jet2_batch(e, rng.uniform(-1, 1, (5, 3)))
    np.testing.assert_array_equal(j.hessian, np.swapaxes(j.hessian, -1, -2))


@settings(max_examples=60, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_linearity_of_jets(a, b):
    x = np.array([[0.3, -0.2, 0.9]])
    e1 = parse("sin(x)*y", ["x", "y", "z"])
    e2 = parse("exp(z) - x^2", ["x", "y", "z"])
    combo = parse(f"({a!r})*(sin(x)*y) + ({b!r})*(exp(z) - x^2)", ["x", "y", "z"])
    j1, j2, jc = (eval_jet2_batch(e, x) for e in (e1, e2, combo))
    np.testing.assert_allclose(jc.gradient, a * j1.gradient + b * j2.gradient, atol=1e-12)
    np.testing.assert_allclose(jc.hessian, a * j1.hessian + b * j2.hessian, atol=1e-12)


def test_expression_is_immutable():
    e = parse("x", ["x"])
    with pytest.raises(Exception):
        e.root = Num(1.0)
    assert isinstance(e, Expression)
