import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cauchyop.expr import (
    Add,
    D,
    Deriv,
    Func,
    Mul,
    Num,
    Param,
    Pow,
    StructuralError,
    Sym,
    Var,
    eval_pointwise,
    evaluate,
    is_canonical,
    normalize,
    spatial_derivative,
    substitute,
    symbols,
    to_poly,
    to_text,
)
from cauchyop.parser import parse_expr, serialize

UNKNOWNS = ("u", "w")
PARAMS = ("nu", "c")

leaves = st.one_of(
    st.builds(Num, st.fractions(min_value=-5, max_value=5, max_denominator=4)),
    st.sampled_from(UNKNOWNS).map(Sym),
    st.sampled_from(PARAMS).map(Param),
    st.just(Var("x")),
    st.builds(lambda u, k: Deriv(Sym(u), ["x"] * k), st.sampled_from(UNKNOWNS), st.integers(1, 3)),
)


def _extend(children):
    return st.one_of(
        st.lists(children, min_size=2, max_size=3).map(Add),
        st.lists(children, min_size=2, max_size=3).map(Mul),
        st.builds(lambda b, k: Pow(b, Num(k)), children, st.integers(0, 3)),
        st.builds(Func, st.sampled_from(("sin", "cos", "exp")), children),
        st.builds(lambda a: Deriv(a, ["x"]), children),
    )


exprs = st.recursive(leaves, _extend, max_leaves=8)


def _parse(text):
    return parse_expr(text, unknowns=UNKNOWNS)


@settings(max_examples=300, deadline=None)
@given(exprs)
def test_serialize_parse_round_trip(e):
    assert normalize(_parse(serialize(e))) == normalize(e)


@settings(max_examples=300, deadline=None)
@given(exprs)
def test_canonical_text_is_a_fixed_point(e):
    n = normalize(e)
    text = to_text(n)
    assert to_text(normalize(_parse(text))) == text
    assert is_canonical(n)


def _commuted(draw_order, e):
    """An algebraically equal tree: sum and product arguments reordered."""
    if isinstance(e, (Add, Mul)):
        args = [_commuted(draw_order, a) for a in e.args]
        args = draw_order(args)
        return type(e)(args)
    if isinstance(e, Pow):
        return Pow(_commuted(draw_order, e.base), e.exponent)
    if isinstance(e, Func):
        return Func(e.name, _commuted(draw_order, e.arg))
    if isinstance(e, Deriv):
        return Deriv(_commuted(draw_order, e.arg), [v for v, c in e.alpha for _ in range(c)])
    return e


deep_exprs = st.recursive(leaves, _extend, max_leaves=14)


@settings(max_examples=200, deadline=None)
@given(deep_exprs, st.randoms(use_true_random=False))
def test_normalize_is_stable_under_commuted_rewrites(e, rnd):
    def shuffle(args):
        args = list(args)
        rnd.shuffle(args)
        return args

    assert normalize(_commuted(shuffle, e)) == normalize(e)


@settings(max_examples=200, deadline=None)
@given(exprs)
def test_normalize_is_idempotent(e):
    n = normalize(e)
    assert normalize(n) == n
    assert to_poly(n) == to_poly(e)


@settings(max_examples=150, deadline=None)
@given(exprs, st.floats(-3, 3), st.floats(0.1, 2))
def test_normal_form_evaluates_like_the_raw_tree(e, xv, uv):
    # derivatives of unknowns are bound to distinct constants
    jets = {}
    for name in UNKNOWNS:
        for k in range(0, 8):
            alpha = (("x", k),) if k else ()
            jets[(name, alpha)] = uv + 0.1 * k + (name == "w")
    env = {"x": xv, "nu": 0.3, "c": -1.25}
    raw = evaluate(e, env, jets)
    canon = evaluate(normalize(e), env, jets)
    assert canon == pytest.approx(raw, rel=1e-9, abs=1e-9)


@settings(max_examples=150, deadline=None)
@given(exprs, exprs)
def test_spatial_derivative_is_a_derivation(a, b):
    da, db = spatial_derivative(a, "x"), spatial_derivative(b, "x")
    assert spatial_derivative(Add([a, b]), "x") == normalize(Add([da, db]))
    assert spatial_derivative(Mul([a, b]), "x") == normalize(Add([Mul([da, b]), Mul([a, db])]))


planar_leaves = st.one_of(
    st.builds(Num, st.integers(-3, 3)),
    st.just(Sym("u")),
    st.sampled_from(("x1", "x2")).map(Var),
    st.builds(lambda v: Deriv(Sym("u"), [v]), st.sampled_from(("x1", "x2"))),
)
planar = st.recursive(
    planar_leaves,
    lambda c: st.one_of(
        st.lists(c, min_size=2, max_size=3).map(Add),
        st.lists(c, min_size=2, max_size=2).map(Mul),
        st.builds(Func, st.sampled_from(("sin", "exp")), c),
    ),
    max_leaves=6,
)


@settings(max_examples=150, deadline=None)
@given(planar, planar, st.fractions(-3, 3, max_denominator=5))
def test_spatial_derivatives_commute_and_are_linear(e, f, a):
    assert spatial_derivative(spatial_derivative(e, "x1"), "x2") == spatial_derivative(
        spatial_derivative(e, "x2"), "x1"
    )
    lhs = spatial_derivative(Add([Mul([Num(a), e]), f]), "x1")
    rhs = normalize(Add([Mul([Num(a), spatial_derivative(e, "x1")]), spatial_derivative(f, "x1")]))
    assert lhs == rhs


closed = st.recursive(
    st.one_of(st.builds(Num, st.integers(-2, 2)), st.just(Var("x")), st.just(Param("c"))),
    lambda c: st.one_of(
        st.lists(c, min_size=2, max_size=3).map(Add),
        st.lists(c, min_size=2, max_size=2).map(Mul),
        st.builds(Func, st.sampled_from(("sin", "cos")), c),
        st.builds(lambda b: Func("exp", Mul([Num(Fraction(1, 4)), b])), c),
    ),
    max_leaves=6,
)


@settings(max_examples=200, deadline=None)
@given(closed, st.floats(-1.5, 1.5))
def test_spatial_derivative_matches_central_differences(e, x0):
    h = 1e-5
    params = {"c": 0.7}
    d = eval_pointwise(spatial_derivative(e, "x"), {"x": x0}, params)
    fd = (eval_pointwise(e, {"x": x0 + h}, params) - eval_pointwise(e, {"x": x0 - h}, params)) / (2 * h)
    scale = max(abs(d), abs(eval_pointwise(e, {"x": x0}, params)), 1.0)
    assert abs(d - fd) <= 1e-6 * scale


def test_eval_pointwise_examples():
    assert eval_pointwise(parse_expr("sin(x1)"), {"x1": 0.0}) == 0.0
    assert eval_pointwise(parse_expr("nu*x1", unknowns=()), {"x1": 2.0}, {"nu": 0.5}) == 1.0
    assert eval_pointwise(parse_expr("exp(0)"), {}) == 1.0


def test_serialize_examples():
    u = Sym("u")
    assert serialize(Mul([Num(3), u])) == "3*u"
    assert serialize(D(u, "x", "x")) == "D(u;x,x)"


def test_printer_examples():
    u = Sym("u")
    assert to_text(normalize(u * u * u * 2)) == "2*u^3"
    assert to_text(normalize(-(u * Param("nu")))) == "-nu*u"
    assert to_text(D(u, "x", "x")) == "D(u;x,x)"
    assert to_text(normalize(Num(Fraction(1, 2)) * u)) == "1/2*u"
    assert to_text(Pow(Add([u, Num(1)]), Num(2))) == "(u + 1)^2"


def test_canonical_form_identifies_equal_polynomials():
    u, x = Sym("u"), Var("x")
    assert normalize((u + x) ** 2) == normalize(u * u + 2 * u * x + x * x)
    assert normalize(u - u) == Num(0)
    assert normalize(Func("sin", u + 0)) == normalize(Func("sin", u))


def test_derivative_commutes_through_functions():
    e = parse_expr("sin(u)", unknowns=["u"])
    assert spatial_derivative(e, "x") == normalize(parse_expr("cos(u)*D(u;x)", unknowns=["u"]))
    e = parse_expr("exp(x*u)", unknowns=["u"])
    assert spatial_derivative(e, "x") == normalize(parse_expr("exp(x*u)*(u + x*D(u;x))", unknowns=["u"]))


def test_substitute_binds_derivatives():
    e = parse_expr("u*D(u;x)", unknowns=["u"])
    out = substitute(e, {"u": parse_expr("sin(x)")})
    assert out == normalize(parse_expr("sin(x)*cos(x)"))


def test_symbols_reports_each_kind():
    e = parse_expr("nu*D(u;x,x) + x*w", unknowns=["u", "w"])
    s = symbols(e)
    assert s["unknowns"] == {"u", "w"}
    assert s["params"] == {"nu"}
    assert s["vars"] == {"x"}


def test_non_integer_exponent_is_structural_error():
    with pytest.raises(StructuralError):
        to_poly(Pow(Sym("u"), Num(Fraction(1, 2))))
    with pytest.raises(StructuralError):
        to_poly(Pow(Sym("u"), Param("c")))


def test_evaluate_matches_math():
    e = parse_expr("exp(sin(x))*cos(x) + log(2 + x)")
    x = 0.7
    assert evaluate(e, {"x": x}) == pytest.approx(math.exp(math.sin(x)) * math.cos(x) + math.log(2 + x))
