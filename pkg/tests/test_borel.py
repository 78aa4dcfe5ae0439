import json
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cauchyop.borel import (
    MollifiedSeries,
    beta_n,
    central_weights,
    cutoff_derivative,
    cutoff_derivative_bound,
    cutoff_eval,
    lattice_csv,
    mollified_eval,
    plateau,
    radius,
    radii_table,
    tail_bound_check,
    taylor_jet_check,
    taylor_sum,
)
from cauchyop.derivation import taylor_coefficients
from cauchyop.parser import parse_expr, parse_system

HEAT = parse_system("param nu = 1; eq: dt(u) = nu*D(u;x,x); init: u = sin(x);")
BURGERS = parse_system("param nu = 0.1; eq: dt(v) = nu*D(v;x,x) - v*D(v;x); init: v = sin(x);")
TWO_PI = (0.0, 2 * math.pi)


def _bump_quotient(t):
    """Independent high-precision reference for the transition."""
    h = lambda s: mpmath.exp(-1 / s) if s > 0 else mpmath.mpf(0)  # noqa: E731
    a = abs(mpmath.mpf(t))
    return h(2 - 2 * a) / (h(2 - 2 * a) + h(2 * a - 1))


# -- cutoff -------------------------------------------------------------------------------


def test_plateaus_are_exact():
    for t in (0.0, 0.3, 0.5, -0.5, -0.1):
        assert cutoff_eval(t) == 1.0
    for t in (1.0, -1.0, 1.2, 40.0, -7.5):
        assert cutoff_eval(t) == 0.0
    arr = cutoff_eval(np.array([0.2, 0.5, 1.0, 3.0]))
    assert arr.tolist() == [1.0, 1.0, 0.0, 0.0]


def test_transition_value_matches_quotient():
    v = cutoff_eval(0.75)
    assert 0.0 < v < 1.0
    assert v == pytest.approx(float(_bump_quotient(0.75)), rel=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.floats(-3, 3, allow_nan=False))
def test_cutoff_is_even_and_bounded(t):
    v = cutoff_eval(t)
    assert 0.0 <= v <= 1.0
    assert v == cutoff_eval(-t)
    assert cutoff_eval(np.array([t]))[0] == pytest.approx(v, rel=1e-14, abs=0)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.51, 0.99))
def test_cutoff_derivative_against_mpmath(t):
    with mpmath.workdps(40):
        ref = mpmath.diff(_bump_quotient, mpmath.mpf(t))
    assert cutoff_derivative(t) == pytest.approx(float(ref), rel=1e-9, abs=1e-14)
    assert cutoff_derivative(-t) == pytest.approx(-float(ref), rel=1e-9, abs=1e-14)


def test_cutoff_derivative_bound():
    with mpmath.workdps(30):
        ts = [mpmath.mpf(0.5) + mpmath.mpf(k) / 2000 for k in range(1, 1000)]
        ref = max(abs(mpmath.diff(_bump_quotient, t)) for t in ts)
    assert cutoff_derivative_bound() == pytest.approx(float(ref), rel=1e-6)
    # psi drops by 1 over an interval of length 1/2
    assert cutoff_derivative_bound() >= 2.0


@pytest.mark.parametrize("t0", [0.5, 1.0])
@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_cutoff_smoothness_across_plateau_edges(t0, k):
    with mpmath.workdps(60):

        def fd(t, h):
            w = central_weights(k, 3)
            return sum(mpmath.mpf(c.numerator) / c.denominator * cutoff_eval(t + (j - 3) * h) for j, c in enumerate(w)) / h**k

        h = mpmath.mpf("1e-4")
        for dt in (-2e-4, 0, 2e-4):
            t = mpmath.mpf(t0) + dt
            d1, d2 = fd(t, h), fd(t, h / 2)
            assert abs(d1 - d2) <= 1e-3
            assert abs(d1) < 1e3


# -- radii and norms --------------------------------------------------------------------------


def test_radius_examples():
    assert radius(2, 0) == 0.5
    assert radius(2, 1) == 0.25
    assert radius(4, 3) == 1 / 96
    with pytest.raises(ValueError):
        radius(0, 0.0)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 12), st.floats(0, 100), st.floats(0.001, 100))
def test_radius_strictly_decreases_in_beta(n, beta, extra):
    assert radius(n, beta + extra) < radius(n, beta)


def test_beta_examples():
    x = parse_expr("x")
    zero = MollifiedSeries([0, 0, 0, 0])
    assert zero.beta == [0.0, 0.0, 0.0, 0.0]
    assert zero.r[1:] == [1.0, 0.5, 1 / 6]
    line = MollifiedSeries([0, 0, x], omega=(0, 1))
    assert beta_n(line, 1) == 0.0
    assert line.beta[2] == 1.0
    assert line.r[2] == 0.25


def test_beta_of_sine_against_dense_sampling():
    s = MollifiedSeries([0, 0, 0, parse_expr("sin(x)")], omega=(0, math.pi))
    xs = np.linspace(0, math.pi, 10**4)
    oracle = max(np.max(np.abs(np.cos(xs))), np.max(np.abs(np.sin(xs))))
    assert s.beta[3] == pytest.approx(oracle, abs=1e-7)
    assert s.beta[3] == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(8, 200), st.integers(1, 9), st.floats(-1, 1))
def test_beta_non_decreasing_under_refinement(m, freq, phase):
    b = parse_expr(f"sin({freq}*x + {phase!r}) + x^2/10")
    s = MollifiedSeries([0, 0, 0, b], omega=(0.0, 3.0))
    coarse = beta_n(s, 3, samples=m)
    fine = beta_n(s, 3, samples=2 * m - 1)
    assert fine >= coarse


def test_sampled_coefficients_use_spectral_derivatives():
    n = 256
    xs = np.arange(n) * (2 * math.pi / n)
    sampled = MollifiedSeries([np.zeros(n), np.zeros(n), np.sin(3 * xs) / 2], omega=TWO_PI)
    symbolic = MollifiedSeries([0, 0, parse_expr("sin(3*x)/2")], omega=TWO_PI)
    assert sampled.beta[2] == pytest.approx(symbolic.beta[2], rel=1e-12)
    assert sampled.values(2, 1.0) == pytest.approx(math.sin(3.0) / 2, rel=1e-12)


def test_inflation_scales_sampled_sups():
    b = parse_expr("sin(x)")
    plain = MollifiedSeries([0, 0, b], omega=TWO_PI)
    inflated = MollifiedSeries([0, 0, b], omega=TWO_PI, inflation=0.05)
    assert inflated.beta[2] == pytest.approx(1.05 * plain.beta[2], rel=1e-15)


# -- evaluation -----------------------------------------------------------------------------------


def _heat(N):
    return MollifiedSeries.from_series(taylor_coefficients(HEAT, N), omega=TWO_PI)


_HEAT6 = _heat(6)


@settings(max_examples=100, deadline=None)
@given(st.floats(-1, 1), st.floats(0, 2 * math.pi))
def test_plateau_evaluation_is_bit_identical(frac, x):
    s = _HEAT6
    t = frac * plateau(s)
    assert mollified_eval(s, t, x) == taylor_sum(s, t, x)


def test_beyond_all_radii_only_b0_survives():
    s = _HEAT6
    t = max(s.r[1:]) * 1.01
    assert mollified_eval(s, t, 1.3) == pytest.approx(math.sin(1.3), rel=1e-15)


def test_heat_value_inside_plateau():
    s = _heat(3)
    t = 0.05
    assert t <= plateau(s)
    xs = np.linspace(0, 2 * math.pi, 17)
    got = mollified_eval(s, t, xs)
    bound = t**4 / math.factorial(4)
    assert np.max(np.abs(got - math.exp(-t) * np.sin(xs))) <= bound


def test_point_outside_omega_is_rejected():
    with pytest.raises(ValueError):
        mollified_eval(_HEAT6, 0.0, 7.0)


def test_lattice_and_table_outputs():
    s = _heat(3)
    csv = lattice_csv(s, [0.0, 0.01], [0.0, 1.0]).splitlines()
    assert csv[0].startswith("t,x")
    assert len(csv) == 5
    rows = json.loads(radii_table(s))
    assert [r["n"] for r in rows] == [1, 2, 3]
    assert all(r["r"] == radius(r["n"], r["beta"]) for r in rows)


# -- lemma checks ------------------------------------------------------------------------------------


def test_tail_bound_zero_series():
    res = tail_bound_check(MollifiedSeries([0] * 8), 0)
    assert res["lhs"] == 0.0 and res["pass"]


def test_tail_bound_constants_termwise():
    res = tail_bound_check(MollifiedSeries([1] * 8), 0)
    assert res["pass"]
    for row in res["terms"]:
        # direct maximization of t^n psi(t/r_n) over the support
        ts = np.linspace(-row["r"], row["r"], 20001)
        direct = float(np.max(np.abs(ts ** row["n"] * cutoff_eval(ts / row["r"]))))
        assert row["term"] == pytest.approx(direct, rel=1e-6)
        assert row["term"] <= row["r"] ** row["n"] <= row["bound"]


def test_tail_bound_burgers_against_finer_sampling():
    series = taylor_coefficients(BURGERS, 8)
    s = MollifiedSeries.from_series(series, omega=TWO_PI)
    res = tail_bound_check(s, 2)
    fine = tail_bound_check(s, 2, samples=10 * s.samples)
    assert res["pass"] and fine["pass"]
    assert res["lhs"] == pytest.approx(fine["lhs"], rel=1e-5)
    assert res["derivative"]["pass"]


def test_central_weights_match_textbook_stencils():
    assert central_weights(1, 2) == [Fraction(1, 12), Fraction(-2, 3), 0, Fraction(2, 3), Fraction(-1, 12)]
    assert central_weights(2, 2) == [Fraction(-1, 12), Fraction(4, 3), Fraction(-5, 2), Fraction(4, 3), Fraction(-1, 12)]


def test_jet_check_heat():
    jet = taylor_jet_check(_heat(10), 4)
    assert jet["max_error"] <= 1e-6
    k2 = [r for r in jet["rows"] if r["k"] == 2 and abs(r["expected"]) > 0.1]
    for r in k2:
        assert r["jet"] == pytest.approx(math.sin(r["x"]), rel=1e-6)


def test_jet_check_zero_series_and_order_zero():
    jet = taylor_jet_check(MollifiedSeries([0] * 6), 4)
    assert all(r["jet"] == 0.0 for r in jet["rows"])
    jet = taylor_jet_check(_heat(4), 2)
    assert all(r["error"] == 0.0 for r in jet["rows"] if r["k"] == 0)
