import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pathinv.expr import (
    BinOp,
    ChartError,
    EvaluationError,
    ExprError,
    ExprSyntaxError,
    Neg,
    Num,
    PeriodicityError,
    PeriodicityWarning,
    UnknownIdentifierError,
    depth,
    evaluate,
    evaluate_on_grid,
    parse,
    to_string,
)
from pathinv.grid import GridSpec


def ev(src, **env):
    return evaluate(parse(src), env)


def test_grammar_examples():
    ast = parse("0.3*sin(alpha)+0.1*cos(x)*sin(3*alpha)")
    assert depth(ast) >= 3
    assert ev("2^3^2") == 512
    with pytest.raises(ExprSyntaxError) as e:
        parse("sin(")
    assert e.value.offset == 4


def test_precedence():
    assert ev("-2^2") == -4
    assert ev("2^-1") == 0.5
    assert ev("1-2-3") == -4
    assert ev("8/4/2") == 1
    assert ev("2*3+4*5") == 26
    assert ev("-(1+2)*3") == -9
    assert parse("-x^2", chart="alpha") == Neg(BinOp("^", parse("x"), Num(2.0)))


def test_no_implicit_multiplication():
    with pytest.raises(ExprSyntaxError) as e:
        parse("2x")
    assert e.value.offset == 1


def test_identifier_errors():
    with pytest.raises(UnknownIdentifierError) as e:
        parse("1 + foo")
    assert e.value.offset == 4
    with pytest.raises(UnknownIdentifierError):
        parse("sinh(x)")
    with pytest.raises(ChartError) as e:
        parse("sin(p) + alpha", chart="alpha")
    assert e.value.offset == 4
    with pytest.raises(ChartError):
        parse("alpha", chart="p")
    with pytest.raises(ExprSyntaxError):
        parse("x(2)")


def test_byte_offsets_utf8():
    with pytest.raises(ExprSyntaxError) as e:
        parse("1 + α")
    assert e.value.offset == 4
    with pytest.raises(ExprSyntaxError) as e:
        parse("αα + $")
    assert e.value.offset == 0


MALFORMED = ["sin(", "2x", "1 +", "(1+2", "1+2)", "* 3", "x ^", "cos()", "3 $ 4", "alpha beta", "1..2", "sin x"]


@pytest.mark.parametrize("src", MALFORMED)
def test_error_offsets_inside_source(src):
    with pytest.raises(ExprError) as e:
        parse(src)
    assert e.value.offset is not None
    assert 0 <= e.value.offset <= len(src.encode())


def test_division_by_zero():
    with pytest.raises(EvaluationError):
        ev("1/(x-x)", x=np.array([1.0, 2.0]))


CLOSURES = [
    ("sin(alpha)", lambda x, y, a: np.sin(a)),
    ("0.3*sin(alpha)+0.1*cos(x)*sin(3*alpha)", lambda x, y, a: 0.3 * np.sin(a) + 0.1 * np.cos(x) * np.sin(3 * a)),
    ("cos(2*pi*x)*cos(3*alpha)", lambda x, y, a: np.cos(2 * np.pi * x) * np.cos(3 * a)),
    ("exp(-y^2)/(2+sin(x))", lambda x, y, a: np.exp(-y ** 2) / (2 + np.sin(x))),
    ("sqrt(1+x^2)*atan(y)", lambda x, y, a: np.sqrt(1 + x ** 2) * np.arctan(y)),
    ("tan(0.2*alpha)-x*y", lambda x, y, a: np.tan(0.2 * a) - x * y),
    ("2^x^0.5", lambda x, y, a: 2 ** (x ** 0.5)),
    ("-x - -y", lambda x, y, a: -x + y),
    ("(x+y)*(x-y)/3", lambda x, y, a: (x + y) * (x - y) / 3),
    ("1.5e-1*cos(alpha)^3", lambda x, y, a: 1.5e-1 * np.cos(a) ** 3),
]


@pytest.mark.parametrize("src,fn", CLOSURES)
def test_evaluation_matches_closure(src, fn):
    rng = np.random.default_rng(1)
    x, y, a = rng.uniform(0, 1, (3, 50))
    got = ev(src, x=x, y=y, alpha=a)
    assert np.max(np.abs(got - fn(x, y, a))) <= 1e-15 * max(1.0, np.max(np.abs(fn(x, y, a))))


def test_evaluate_on_grid():
    spec = GridSpec(8, 8, 16)
    f = evaluate_on_grid(parse("sin(alpha)"), spec)
    assert np.max(np.abs(f.samples - np.sin(spec.mesh()[2]))) <= 1e-15
    g = evaluate_on_grid(parse("cos(2*pi*x)*cos(3*alpha)"), spec)
    lines = np.argwhere(np.abs(g.spectrum()) > 1e-12)
    assert len(lines) == 4  # (+-1 in x) x (+-3 in alpha)
    with pytest.warns(PeriodicityWarning):
        evaluate_on_grid(parse("x"), spec)
    with pytest.raises(PeriodicityError):
        evaluate_on_grid(parse("x"), spec, strict=True)
    with pytest.raises(ChartError):
        evaluate_on_grid(parse("p"), spec)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        evaluate_on_grid(parse("cos(2*pi*(x+y))"), spec)


# generated corpus for round trips

_leaf = st.one_of(
    st.floats(0, 100, allow_nan=False, allow_infinity=False).map(lambda v: repr(v)),
    st.sampled_from(["x", "y", "alpha", "p", "pi"]),
)


def _extend(children):
    return st.one_of(
        st.tuples(children, st.sampled_from("+-*/^"), children).map(lambda t: f"({t[0]}){t[1]}({t[2]})"),
        st.tuples(st.sampled_from(["sin", "cos", "tan", "atan", "exp", "sqrt"]), children).map(
            lambda t: f"{t[0]}({t[1]})"),
        children.map(lambda c: f"-{c}"),
    )


expressions = st.recursive(_leaf, _extend, max_leaves=12)


@given(expressions)
@settings(max_examples=50)
def test_parse_print_parse_idempotent(src):
    ast = parse(src)
    printed = to_string(ast)
    assert parse(printed) == ast
    assert to_string(parse(printed)) == printed


def test_pi_constant():
    assert ev("pi") == math.pi
