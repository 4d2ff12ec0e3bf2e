import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from statgeo import expr as ex
from statgeo.expr import (
    Add,
    Call,
    ExprDomainError,
    ExprNameError,
    ExprSyntaxError,
    Mul,
    Neg,
    Num,
    Pow,
    Sub,
    Var,
    diff,
    eval_expr,
    parse,
    to_str,
)

from helpers import fd_partial, random_expr, random_point

COORDS = ("t", "x", "y")


# ---------------------------------------------------------------------------
# parsing


def test_precedence_and_shape():
    e = parse("1 + 2*t", COORDS)
    assert e == Add(Num(1.0), Mul(Num(2.0), Var("t")))
    assert eval_expr(e, {"t": 3.0}) == 7.0


@pytest.mark.parametrize(
    "text,env,value",
    [
        ("2*t - t/4", {"t": 4.0}, 7.0),
        ("exp(0)*5", {}, 5.0),
        ("(1 + t)^2", {"t": 2.0}, 9.0),
        ("t^-2", {"t": 2.0}, 0.25),
        ("1e-3 + 2.5E2", {}, 250.001),
        (" exp( t ) * 2 ", {"t": 0.0}, 2.0),
        ("sin(t)^2 + cos(t)^2", {"t": 0.7}, 1.0),
        ("cosh(t)^2 - sinh(t)^2", {"t": 0.4}, 1.0),
    ],
)
def test_eval_values(text, env, value):
    assert eval_expr(parse(text, COORDS), env) == pytest.approx(value, abs=1e-12)


def test_unary_minus_binds_before_power():
    # "-t^2" is (-t)^2, not -(t^2)
    assert eval_expr(parse("-t^2", COORDS), {"t": 3.0}) == 9.0
    assert eval_expr(parse("-(t^2)", COORDS), {"t": 3.0}) == -9.0


def test_power_exponent_must_be_numeric():
    with pytest.raises(ExprSyntaxError) as info:
        parse("x^t", COORDS)
    assert info.value.offset == 2


@pytest.mark.parametrize(
    "text,offset",
    [
        ("(1 + 2", 6),
        ("exp(", 4),
        ("1 + * 2", 4),
        ("exp 2", 4),
        ("1 2", 2),
    ],
)
def test_syntax_error_offsets(text, offset):
    with pytest.raises(ExprSyntaxError) as info:
        parse(text, COORDS)
    assert info.value.offset == offset


def test_unknown_identifier():
    with pytest.raises(ExprNameError, match="'q'"):
        parse("q + 1", COORDS)


def test_unknown_identifier_lists_coordinates():
    with pytest.raises(ExprNameError, match="t, x, y"):
        parse("z", COORDS)


# ---------------------------------------------------------------------------
# folding


@pytest.mark.parametrize(
    "text,expected",
    [
        ("0 + t", Var("t")),
        ("t - 0", Var("t")),
        ("t*1", Var("t")),
        ("1*t", Var("t")),
        ("0*t", Num(0.0)),
        ("t/1", Var("t")),
        ("t^1", Var("t")),
        ("t^0", Num(1.0)),
        ("2^3", Num(8.0)),
        ("--t", Var("t")),
        ("2 + 3*4", Num(14.0)),
    ],
)
def test_constant_and_neutral_folds(text, expected):
    assert parse(text, COORDS) == expected


def test_constant_division_by_zero_rejected():
    with pytest.raises(ExprDomainError):
        parse("1/0", COORDS)


# ---------------------------------------------------------------------------
# printing


@pytest.mark.parametrize(
    "e,s",
    [
        (Neg(Pow(Var("x"), 2.0)), "-(x^2)"),
        (Pow(Neg(Var("x")), 2.0), "(-x)^2"),
        (Mul(Add(Var("x"), Num(1.0)), Var("y")), "(x + 1)*y"),
        (Sub(Var("x"), Sub(Var("y"), Var("t"))), "x - (y - t)"),
        (Pow(Var("t"), -2.0), "t^-2"),
        (Call("exp", Neg(Var("t"))), "exp(-t)"),
    ],
)
def test_printer_pins(e, s):
    assert to_str(e) == s
    assert parse(s, COORDS) == e


def expr_strategy():
    atoms = st.one_of(
        st.sampled_from([Var(c) for c in COORDS]),
        st.floats(min_value=-50, max_value=50).map(lambda v: Num(round(v, 3))),
    )

    def safe_pow(an):
        try:
            return ex.pow_(an[0], float(an[1]))
        except ExprDomainError:  # folding 0^-n
            return an[0]

    def extend(children):
        nonzero_num = (
            st.floats(min_value=0.5, max_value=9.0).map(lambda v: Num(round(v, 2)))
        )
        return st.one_of(
            st.tuples(children, children).map(lambda ab: ex.add(*ab)),
            st.tuples(children, children).map(lambda ab: ex.sub(*ab)),
            st.tuples(children, children).map(lambda ab: ex.mul(*ab)),
            st.tuples(children, st.one_of(nonzero_num, st.sampled_from([Var(c) for c in COORDS]))).map(
                lambda ab: ex.div(*ab)
            ),
            children.map(ex.neg),
            st.tuples(children, st.integers(min_value=-3, max_value=3)).map(safe_pow),
            st.tuples(st.sampled_from(["sin", "cos", "sinh"]), children).map(
                lambda fa: ex.call(fa[0], fa[1])
            ),
        )

    return st.recursive(atoms, extend, max_leaves=12)


@given(expr_strategy())
@settings(max_examples=300)
def test_print_parse_roundtrip(e):
    assert parse(to_str(e), COORDS) == e


# ---------------------------------------------------------------------------
# differentiation


def test_diff_pins():
    t = Var("t")
    assert diff(Num(4.0), "t") == Num(0.0)
    assert diff(t, "x") == Num(0.0)
    assert diff(parse("t^3", COORDS), "t") == Mul(Num(3.0), Pow(t, 2.0))
    d = diff(parse("exp(2*t)", COORDS), "t")
    assert eval_expr(d, {"t": 0.5}) == pytest.approx(2.0 * math.e, rel=1e-15)
    d = diff(parse("log(t)", COORDS), "t")
    assert eval_expr(d, {"t": 4.0}) == pytest.approx(0.25)
    d = diff(parse("t/x", COORDS), "x")
    assert eval_expr(d, {"t": 6.0, "x": 2.0}) == pytest.approx(-1.5)


def test_diff_matches_finite_differences():
    rng = random.Random(2024)
    checked = 0
    while checked < 100:
        e = random_expr(rng, COORDS, depth=4)
        env = random_point(rng, COORDS)
        try:
            v = eval_expr(e, env)
        except ExprDomainError:
            continue
        if abs(v) > 1e6:
            continue
        for c in COORDS:
            got = eval_expr(diff(e, c), env)
            want = fd_partial(e, env, c)
            assert abs(got - want) <= 1e-6 * (1.0 + abs(want)), to_str(e)
        checked += 1


def test_second_derivatives_are_exact():
    e = parse("exp(t)*sin(x)", COORDS)
    d2 = diff(diff(e, "t"), "x")
    env = {"t": 0.3, "x": 1.1}
    assert eval_expr(d2, env) == pytest.approx(math.exp(0.3) * math.cos(1.1), rel=1e-14)


# ---------------------------------------------------------------------------
# evaluation errors


def test_division_by_zero():
    with pytest.raises(ExprDomainError):
        eval_expr(parse("1/t", COORDS), {"t": 0.0})


def test_log_of_nonpositive():
    with pytest.raises(ExprDomainError):
        eval_expr(parse("log(t)", COORDS), {"t": -1.0})
    with pytest.raises(ExprDomainError):
        eval_expr(parse("log(t)", COORDS), {"t": 0.0})


def test_fractional_power_of_negative():
    with pytest.raises(ExprDomainError):
        eval_expr(parse("t^0.5", COORDS), {"t": -2.0})


def test_overflow_is_a_domain_error():
    with pytest.raises(ExprDomainError):
        eval_expr(parse("exp(exp(exp(t)))", COORDS), {"t": 3.0})


def test_missing_coordinate_value():
    with pytest.raises(ExprNameError):
        eval_expr(Var("t"), {"x": 1.0})


def test_operator_sugar():
    t = Var("t")
    e = 2 * t - t * t
    assert eval_expr(e, {"t": 3.0}) == -3.0
    assert eval_expr(-t + 1, {"t": 3.0}) == -2.0
