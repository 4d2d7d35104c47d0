import math

import numpy as np
import pytest

from vort import expr as ex
from vort.errors import (EvalDomainError, ExprSyntaxError,
                         UnboundVariableError, UnknownFunctionError)


def test_parse_power_of_function():
    e = ex.parse("cos(theta)^2")
    assert e == ex.Binary("pow", ex.Unary("cos", ex.Var("theta")), ex.Const(2.0))


def test_parse_difference():
    assert ex.parse("x1 - x2") == ex.Binary("sub", ex.Var("x1"), ex.Var("x2"))


def test_parse_error_carries_offset_and_expectations():
    with pytest.raises(ExprSyntaxError) as info:
        ex.parse("1 + * 2")
    assert info.value.offset == 4
    assert len(info.value.expected) > 0


def test_unknown_function():
    with pytest.raises(UnknownFunctionError):
        ex.parse("foo(x)")


def test_unbalanced_paren():
    with pytest.raises(ExprSyntaxError):
        ex.parse("(1 + 2")


@pytest.mark.parametrize("text,point,value", [
    ("cos(theta)^2", {"theta": 0.0}, 1.0),
    ("x1 - x2", {"x1": 3.0, "x2": 1.0}, 2.0),
    ("2^-3", {}, 0.125),
    ("x^2^3", {"x": 2.0}, 256.0),          # right-associative
    ("1 + 2*3", {}, 7.0),
    ("-2^2", {}, -4.0),                     # unary minus binds looser than ^
    ("sinh(0) + cosh(0)", {}, 1.0),
    ("tan(0.5)", {}, math.tan(0.5)),
])
def test_eval_values(text, point, value):
    assert ex.evaluate(ex.parse(text), point) == pytest.approx(value, abs=1e-15)


def test_eval_domain_errors():
    with pytest.raises(EvalDomainError):
        ex.evaluate(ex.parse("sqrt(x1)"), {"x1": -1.0})
    with pytest.raises(EvalDomainError):
        ex.evaluate(ex.parse("log(x1)"), {"x1": 0.0})
    with pytest.raises(EvalDomainError):
        ex.evaluate(ex.parse("1/x"), {"x": 0.0})
    with pytest.raises(EvalDomainError):
        ex.evaluate(ex.parse("x^0.5"), {"x": -2.0})
    with pytest.raises(EvalDomainError):
        ex.evaluate(ex.parse("exp(x)"), {"x": 1e6})


def test_eval_unbound_variable():
    with pytest.raises(UnboundVariableError):
        ex.evaluate(ex.parse("x1 + q"), {"x1": 1.0})


def test_integer_power_of_negative_base_is_fine():
    assert ex.evaluate(ex.parse("x^3"), {"x": -2.0}) == -8.0


def test_diff_chain_rule_matches_closed_form():
    d = ex.diff(ex.parse("cos(theta)^2"), "theta")
    for theta in np.linspace(-1.5, 1.5, 25):
        expected = -2.0 * math.cos(theta) * math.sin(theta)
        assert ex.evaluate(d, {"theta": theta}) == pytest.approx(expected, abs=1e-14)


def test_diff_trivial_cases():
    assert ex.diff(ex.parse("x1 - x2"), "x1") == ex.ONE
    assert ex.diff(ex.parse("c"), "x1") == ex.ZERO
    assert ex.diff(ex.const(7.25), "x1") == ex.ZERO


def _central_difference(e, point, name, h=1e-5):
    up = dict(point)
    dn = dict(point)
    up[name] += h
    dn[name] -= h
    return (ex.evaluate(e, up) - ex.evaluate(e, dn)) / (2.0 * h)


def test_diff_against_finite_differences():
    # independent oracle for the symbolic derivative: central differences at
    # 100 random in-domain points over generator-built expressions
    from conftest import random_scalar
    rng = np.random.RandomState(123)
    checked = 0
    while checked < 100:
        e = random_scalar(rng, ("x", "y"), terms=4)
        point = {"x": rng.uniform(-3, 3), "y": rng.uniform(-3, 3)}
        for name in ("x", "y"):
            sym = ex.evaluate(ex.diff(e, name), point)
            fd = _central_difference(e, point, name)
            if abs(sym) > 1e6:
                continue
            assert abs(sym - fd) <= 1e-6 * max(1.0, abs(sym)), ex.to_text(e)
            checked += 1


def test_diff_is_linear_by_evaluation():
    from conftest import random_scalar
    rng = np.random.RandomState(5)
    a = random_scalar(rng, ("x", "y"))
    b = random_scalar(rng, ("x", "y"))
    summed = ex.diff(ex.add(a, b), "x")
    parts = ex.add(ex.diff(a, "x"), ex.diff(b, "x"))
    for _ in range(20):
        p = {"x": rng.uniform(-2, 2), "y": rng.uniform(-2, 2)}
        assert ex.evaluate(summed, p) == pytest.approx(ex.evaluate(parts, p), abs=1e-10)


def test_print_parse_round_trip_on_generated_trees():
    from conftest import random_scalar
    rng = np.random.RandomState(77)
    for _ in range(50):
        e = random_scalar(rng, ("x", "y"), terms=4)
        assert ex.parse(ex.to_text(e)) == e
        d = ex.diff(e, "x")
        assert ex.parse(ex.to_text(d)) == d


def test_print_parse_round_trip_negative_constants():
    e = ex.const(-2.5)
    assert ex.parse(ex.to_text(e)) == e
    e2 = ex.neg(ex.var("x"))
    assert ex.parse(ex.to_text(e2)) == e2


def test_printer_reparse_stable_for_parsed_text():
    for text in ("1 + 2*x", "-x^2", "sin(x)*cos(y)/(2 + x)", "x/ (y - 4) ^ 2"):
        e = ex.parse(text)
        assert ex.parse(ex.to_text(e)) == e


def test_simplifier_rules():
    x = ex.var("x")
    assert ex.add(x, ex.ZERO) is x
    assert ex.mul(ex.ONE, x) is x
    assert ex.mul(ex.ZERO, x) == ex.ZERO
    assert ex.power(x, ex.ONE) is x
    assert ex.neg(ex.neg(x)) is x
    assert ex.add(ex.const(1), ex.const(2)) == ex.const(3)
    # folding must not hide domain errors
    bad = ex.div(ex.ONE, ex.ZERO)
    assert isinstance(bad, ex.Binary)


def test_eval_grid_matches_scalar_eval():
    e = ex.parse("sin(x)*y + x^2")
    xs = np.linspace(-1, 1, 7)
    ys = np.linspace(0, 2, 5)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    grid = ex.eval_grid(e, {"x": X, "y": Y})
    for i in range(7):
        for j in range(5):
            assert grid[i, j] == pytest.approx(
                ex.evaluate(e, {"x": xs[i], "y": ys[j]}), abs=1e-15)


def test_substitute():
    e = ex.parse("x^2 + y")
    sub = ex.substitute(e, {"x": ex.parse("sin(t)"), "y": 3.0})
    assert ex.evaluate(sub, {"t": 0.3}) == pytest.approx(math.sin(0.3) ** 2 + 3.0)
