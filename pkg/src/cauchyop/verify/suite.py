"""Named check collections: the golden suite and its Navier-Stokes and cutoff parts."""

from __future__ import annotations

import math

import numpy as np

from ..borel import MollifiedSeries, cutoff_eval, tail_bound_check, taylor_jet_check
from ..derivation import ExpressionSwellError, taylor_coefficients
from ..expr import to_poly
from ..navier_stokes import (
    ns_taylor_coefficients,
    pressure_solve,
    random_band_limited,
    taylor_green_2d,
)
from ..parser import parse_expr
from ..spectral import Field, PeriodicGrid
from .golden import GOLDEN, golden_case
from .harness import (
    algebra_check,
    compare_with_exact,
    equivalence_test,
    homomorphism_test,
    reference_check,
)
from .reference import ns_fd_coefficients
from .report import SKIP, Check, VerificationReport

__all__ = [
    "borel_checks",
    "case_checks",
    "golden_suite",
    "ns_checks",
    "ns_random_check",
    "ns_taylor_green_check",
    "pressure_checks",
]

HOMOMORPHISM_OUTER = (("g^2", 1), ("g1*g2", 2), ("sin(g)", 1))


def _rel(a, b):
    scale = float(np.max(np.abs(b))) or 1.0
    return float(np.max(np.abs(a - b))) / scale


def expansion_check(case, order, max_terms):
    """The expansion itself at a requested order; SKIP when it swells past the cap."""
    try:
        series = taylor_coefficients(case.system, order, max_terms=max_terms)
    except ExpressionSwellError as exc:
        return Check(f"expand:{case.name}", math.nan, 0, SKIP, {"reason": str(exc)})
    terms = max(len(to_poly(c)) for u in case.system.unknowns for c in series.symbolic[u])
    return Check(f"expand:{case.name}", 0.0, 0, detail={"order": order, "max_terms": terms})


def case_checks(name, order=None, max_terms=None):
    """Every applicable check for one golden case."""
    case = golden_case(name)
    rep = VerificationReport()
    with rep.timed():
        if case.exact:
            rep.add(compare_with_exact(case, order, max_terms))
        else:
            rep.add(reference_check(case))
            if order is not None:
                rep.add(expansion_check(case, order, max_terms))
    system = case.system
    with rep.timed():
        rep.extend(equivalence_test(system, min(order or 4, 4), max_terms))
    if system.dim == 1 and len(system.unknowns) == 1:
        u = system.unknowns[0]
        for text, p in HOMOMORPHISM_OUTER:
            g = [u] if p == 1 else [u, f"D({u};x)"]
            with rep.timed():
                rep.add(homomorphism_test(system, g, text, 4, max_terms))
    return rep


def borel_checks(N=10, max_i=3, jet_K=4):
    rep = VerificationReport()
    plateau_ok = all(cutoff_eval(t) == 1.0 for t in (0.0, 0.25, -0.5, 0.5)) and all(
        cutoff_eval(t) == 0.0 for t in (1.0, -1.0, 1.2, 7.0)
    )
    rep.add(Check("cutoff:plateaus", float(not plateau_ok), 0))

    x = parse_expr("x")
    hand = [
        ("zero", MollifiedSeries([0, 0, 0, 0]), [1.0, 1 / 2, 1 / 6]),
        ("constants", MollifiedSeries([1, 1, 1, 1]), [1.0, 1 / 2, 1 / 6]),
        ("b2=x on (0,1)", MollifiedSeries([0, 0, x], omega=(0, 1)), [1.0, 1 / 4]),
    ]
    for label, s, expected in hand:
        err = max(abs(a - b) for a, b in zip(s.r[1:], expected))
        rep.add(Check(f"radius:{label}", err, 1e-15, detail={"r": s.r[1:], "expected": expected}))

    for name, case in GOLDEN.items():
        with rep.timed():
            series = taylor_coefficients(case.system, N)
            for u in case.system.unknowns:
                ms = MollifiedSeries.from_series(series, u, omega=case.omega)
                for i in range(max_i + 1):
                    res = tail_bound_check(ms, i)
                    excess = max(res["lhs"] - res["rhs"], res["derivative"]["lhs"] - res["derivative"]["rhs"], 0.0)
                    rep.add(Check(f"tail:{name}:{u}:i={i}", excess, 0,
                                  detail={"lhs": res["lhs"], "rhs": res["rhs"], "N": N,
                                          "dlhs": res["derivative"]["lhs"], "drhs": res["derivative"]["rhs"]}))

    heat = golden_case("heat")
    with rep.timed():
        ms = MollifiedSeries.from_series(taylor_coefficients(heat.system, N), omega=heat.omega)
        jet = taylor_jet_check(ms, jet_K)
        rep.add(Check("jet:heat", jet["max_error"], 1e-6, detail={"K": jet_K, "N": N, "step": jet["step"]}))
    return rep


def pressure_checks(n=64):
    rep = VerificationReport()
    grid = PeriodicGrid((n, n))
    x, y = grid.coords
    p = pressure_solve(taylor_green_2d(grid))
    rep.add(Check("pressure:taylor-green-2d", float(np.max(np.abs(p[0] + (np.cos(2 * x) + np.cos(2 * y)) / 4))), 1e-10))
    z = pressure_solve(Field(grid, np.zeros((2, n, n))))
    rep.add(Check("pressure:zero", float(np.max(np.abs(z.data))), 0))
    rep.add(Check("pressure:zero-mean", abs(float(np.mean(p.data))), 1e-15))
    return rep


def ns_taylor_green_check(n=64, nu=0.1, N=4):
    rep = VerificationReport()
    grid = PeriodicGrid((n, n))
    u0 = taylor_green_2d(grid)
    co = ns_taylor_coefficients(u0, nu, N)
    err = max(_rel(co.a[k].data, (-2 * nu) ** k * u0.data) for k in range(N + 1))
    rep.add(Check(f"ns:taylor-green-2d:decay nu={nu}", err, 1e-8, detail={"grid": [n, n], "N": N}))
    div = max(co.divergence[k] / max(co.a[k].max_norm(), 1e-300) for k in range(N + 1))
    rep.add(Check(f"ns:taylor-green-2d:divergence nu={nu}", div, 1e-10))
    eu = ns_taylor_coefficients(u0, 0.0, N)
    err = max(eu.a[k].max_norm() for k in range(1, N + 1)) / u0.max_norm()
    rep.add(Check("ns:taylor-green-2d:euler steady", err, 1e-10))
    return rep


def ns_random_check(seed, n=16, nu=0.1, h=1e-4):
    rep = VerificationReport()
    grid = PeriodicGrid((n, n, n))
    u0 = random_band_limited(grid, seed)
    co = ns_taylor_coefficients(u0, nu, 2)
    a1, a2 = ns_fd_coefficients(u0, nu, h)
    rep.add(Check(f"ns:random-3d:a1 seed={seed}", _rel(a1.data, co.a[1].data), 1e-5, detail={"grid": [n] * 3, "h": h}))
    rep.add(Check(f"ns:random-3d:a2 seed={seed}", _rel(a2.data, co.a[2].data), 1e-4, detail={"grid": [n] * 3, "h": h}))
    div = max(co.divergence[k] / max(co.a[k].max_norm(), 1e-300) for k in range(3))
    rep.add(Check(f"ns:random-3d:divergence seed={seed}", div, 1e-10))
    return rep


def ns_checks(seed=0):
    rep = VerificationReport()
    for part in (pressure_checks(), ns_taylor_green_check(), ns_random_check(seed)):
        rep.extend(part)
    return rep


def golden_suite(seed=0, algebra_count=100):
    """Everything: golden cases, cutoff construction, Navier-Stokes, random algebra."""
    rep = VerificationReport()
    for name in GOLDEN:
        rep.extend(case_checks(name))
    with rep.timed():
        clock = taylor_coefficients(golden_case("clock").system, 8)
        pattern = [str(c) for c in clock["v"]]
        expected = ["0", "0"] + ["1"] * 7
        rep.add(Check("clock:pattern", float(pattern != expected), 0, detail={"coefficients": pattern}))
    with rep.timed():
        rep.extend(algebra_check(golden_case("burgers").system, algebra_count, seed))
    rep.extend(borel_checks())
    with rep.timed():
        rep.extend(ns_checks(seed))
    return rep
