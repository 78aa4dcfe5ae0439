import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cauchyop.derivation import (
    ExpressionSwellError,
    NonlocalTermError,
    apply_A,
    augment_time,
    taylor_coefficients,
)
from cauchyop.expr import (
    Add,
    Deriv,
    Func,
    Mul,
    Num,
    Param,
    Pow,
    Sym,
    Var,
    normalize,
    spatial_derivative,
    substitute,
    symbols,
)
from cauchyop.parser import parse_expr, parse_system

BURGERS = parse_system("eq: dt(u) = nu*D(u;x,x) - u*D(u;x);")
PAIR = parse_system("eq: dt(u) = w*D(u;x) + c; eq: dt(w) = sin(u) - x*w^2;")


def E(text, unknowns=("u", "w")):
    return normalize(parse_expr(text, unknowns=list(unknowns)))


leaves = st.one_of(
    st.builds(Num, st.integers(-4, 4)),
    st.sampled_from(("u", "w")).map(Sym),
    st.just(Param("c")),
    st.just(Var("x")),
    st.builds(lambda n, k: Deriv(Sym(n), ["x"] * k), st.sampled_from(("u", "w")), st.integers(1, 2)),
)
exprs = st.recursive(
    leaves,
    lambda c: st.one_of(
        st.lists(c, min_size=2, max_size=3).map(Add),
        st.lists(c, min_size=2, max_size=2).map(Mul),
        st.builds(lambda b: Pow(b, Num(2)), c),
        st.builds(Func, st.sampled_from(("sin", "cos", "exp")), c),
        st.builds(lambda a: Deriv(a, ["x"]), c),
    ),
    max_leaves=6,
)


@settings(max_examples=150, deadline=None)
@given(exprs, exprs, st.fractions(-5, 5, max_denominator=6))
def test_linearity(e1, e2, c):
    lhs = apply_A(Add([Mul([Num(c), e1]), e2]), PAIR)
    rhs = normalize(Add([Mul([Num(c), apply_A(e1, PAIR)]), apply_A(e2, PAIR)]))
    assert lhs == rhs


@settings(max_examples=150, deadline=None)
@given(exprs, exprs)
def test_leibniz(e1, e2):
    lhs = apply_A(Mul([e1, e2]), PAIR)
    rhs = normalize(Add([Mul([apply_A(e1, PAIR), e2]), Mul([e1, apply_A(e2, PAIR)])]))
    assert lhs == rhs


@settings(max_examples=150, deadline=None)
@given(exprs)
def test_commutes_with_spatial_derivative(e):
    assert apply_A(spatial_derivative(e, "x"), PAIR) == spatial_derivative(apply_A(e, PAIR), "x")


@settings(max_examples=100, deadline=None)
@given(exprs, st.sampled_from(("sin", "cos", "exp")))
def test_chain_rule(e, f):
    derivative = {"sin": "cos(g)", "cos": "-sin(g)", "exp": "exp(g)"}[f]
    outer = substitute(parse_expr(derivative, unknowns=["g"]), {"g": e})
    assert apply_A(Func(f, e), PAIR) == normalize(Mul([outer, apply_A(e, PAIR)]))


def test_constants_and_coordinates_are_annihilated():
    assert apply_A(E("3 + c*x"), PAIR) == Num(0)


def test_base_case_is_the_right_hand_side():
    assert apply_A(Sym("u"), BURGERS) == BURGERS.rhs["u"]
    assert apply_A(Sym("w"), PAIR) == PAIR.rhs["w"]


def test_square_gives_two_u_f():
    assert apply_A(E("u^2", ["u"]), BURGERS) == normalize(Mul([Num(2), Sym("u"), BURGERS.rhs["u"]]))


def test_sin_u_chain_rule_example():
    assert apply_A(E("sin(u)", ["u"]), BURGERS) == normalize(Mul([Func("cos", Sym("u")), BURGERS.rhs["u"]]))


def test_quadratic_ode_second_iterate():
    s = parse_system("eq: dt(u) = u^2;")
    assert apply_A(apply_A(Sym("u"), s), s) == E("2*u^3", ["u"])


def test_second_iterate_matches_closed_form_oracle():
    # u/(1 - u t) = sum u^{n+1} t^n, so a_n = n! u^{n+1}
    s = parse_system("eq: dt(u) = u^2;")
    series = taylor_coefficients(s, 6)
    for n, a in enumerate(series["u"]):
        assert a == E(f"{math.factorial(n)}*u^{n + 1}", ["u"])


def test_heat_coefficients():
    s = parse_system("param nu = 0.3; eq: dt(u) = nu*D(u;x,x); init: u = sin(x);")
    series = taylor_coefficients(s, 6)
    for n, a in enumerate(series["u"]):
        assert a == normalize(Mul([Pow(Mul([Num(-1), Param("nu")]), Num(n)), Func("sin", Var("x"))]))


def test_transport_with_symbolic_data_is_the_shift_series():
    s = parse_system("eq: dt(u) = D(u;x);")
    series = taylor_coefficients(s, 5)
    for n, a in enumerate(series["u"]):
        assert a == normalize(Deriv(Sym("u"), ["x"] * n))


def test_riccati_constant_data():
    s = parse_system("param c = 0.5; eq: dt(v) = v^2; init: v = c;")
    series = taylor_coefficients(s, 6)
    for n, a in enumerate(series["v"]):
        assert a == normalize(Mul([Num(math.factorial(n)), Pow(Param("c"), Num(n + 1))]))


def test_first_coefficient_is_initial_data():
    s = parse_system("eq: dt(v) = v*D(v;x); init: v = cos(x);")
    assert taylor_coefficients(s, 3)["v"][0] == s.init["v"]


def test_clock_patterns():
    pure = parse_system("time_dependent; eq: dt(v) = s; init: v = 0;")
    assert [str(c) for c in taylor_coefficients(pure, 4)["v"]] == ["0", "0", "1", "0", "0"]
    mixed = parse_system("time_dependent; eq: dt(v) = v + s; init: v = 0;")
    assert [str(c) for c in taylor_coefficients(mixed, 8)["v"]] == ["0", "0"] + ["1"] * 7


def test_time_dependent_coefficients_have_no_clock():
    s = parse_system("time_dependent; eq: dt(v) = s*D(v;x,x) + s^2; init: v = sin(x);")
    series = taylor_coefficients(s, 5)
    for a in series["v"]:
        assert "s" not in symbols(a)["vars"]
    # by hand: a1 = 0, a2 = D(v;x,x) = -sin(x), a3 = 2
    assert series["v"][1] == Num(0)
    assert series["v"][2] == E("-sin(x)")
    assert series["v"][3] == Num(2)


def test_augment_time_preconditions():
    plain = parse_system("eq: dt(v) = v;")
    with pytest.raises(ValueError):
        augment_time(plain)
    aug = augment_time(parse_system("time_dependent; eq: dt(v) = s;"))
    assert aug.augmented
    with pytest.raises(ValueError):
        augment_time(aug)
    assert apply_A(Var("s"), aug) == Num(1)


def test_time_dependent_system_needs_augmentation_for_apply_A():
    with pytest.raises(ValueError):
        apply_A(Sym("v"), parse_system("time_dependent; eq: dt(v) = s;"))


def test_pressure_marker_is_refused():
    s = parse_system(
        "dim 2; unknowns v1, v2;"
        "eq: dt(v1) = -v1*D(v1;x1) - v2*D(v1;x2) - D(leray_pressure(v1,v2);x1);"
        "eq: dt(v2) = -v1*D(v2;x1) - v2*D(v2;x2) - D(leray_pressure(v1,v2);x2);"
    )
    with pytest.raises(NonlocalTermError):
        apply_A(Sym("v1"), s)


def test_term_cap_raises_swell_error():
    with pytest.raises(ExpressionSwellError) as info:
        taylor_coefficients(BURGERS, 8, max_terms=50)
    assert info.value.order <= 8 and info.value.terms > 50


def test_series_json_export():
    s = parse_system("param nu = 1; eq: dt(u) = nu*D(u;x,x); init: u = sin(x);")
    data = json.loads(taylor_coefficients(s, 2).to_json())
    assert data == [{
        "unknown": "u",
        "order": 2,
        "coefficients": ["sin(x)", "-nu*sin(x)", "nu^2*sin(x)"],
        "symbolic": ["u", "nu*D(u;x,x)", "nu^2*D(u;x,x,x,x)"],
    }]
    text = taylor_coefficients(s, 2).table()
    assert "a2[u] = nu^2*sin(x)" in text


def test_series_coefficients_are_canonical_fractions():
    s = parse_system("eq: dt(u) = u^2/2; init: u = 1;")
    assert [a for a in taylor_coefficients(s, 3)["u"]] == [Num(1), Num(Fraction(1, 2)), Num(Fraction(1, 2)), Num(Fraction(3, 4))]
