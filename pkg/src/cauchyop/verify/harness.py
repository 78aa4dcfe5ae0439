"""Series identities, golden comparisons and PDE residuals."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from ..borel import MollifiedSeries, cutoff_derivative, cutoff_eval
from ..derivation import ExpressionSwellError, Operator, augment_time, taylor_coefficients
from ..expr import Evaluator, Sym, lift, substitution, to_poly, to_text
from ..expr import poly as P
from ..parser import parse_expr
from ..system import TIME_SYMBOL
from .randexpr import RandomExpressions
from .reference import MethodOfLines, fd_jet
from .report import SKIP, Check, VerificationReport
from .series import Series, compose

__all__ = [
    "algebra_check",
    "compare_with_exact",
    "equivalence_test",
    "homomorphism_test",
    "reference_check",
    "residual",
]

_T = (P.VAR, "t")


def _operator(system, max_terms=None):
    if system.time_dependent and not system.augmented:
        system = augment_time(system)
    return Operator(system, max_terms)


def _t_derivative_at_zero(p, n):
    d = P.spatial("t")
    for _ in range(n):
        p = d(p)
    return substitution({}, variables={"t": 0}, strict=False)(p)


def _grid(omega, count=65):
    return np.linspace(omega[0], omega[1], count) if omega else np.zeros(1)


def _pointwise_error(p, q, omega, params):
    env = dict(params)
    if omega:
        env["x"] = _grid(omega)
    a = np.asarray(Evaluator(env)(p), dtype=float)
    b = np.asarray(Evaluator(env)(q), dtype=float)
    return float(np.max(np.abs(a - b) / (1.0 + np.abs(b))))


def compare_with_exact(case, order=None, max_terms=None):
    """a_n against d^n/dt^n of the closed-form solution at t = 0.

    Canonical equality is tried first; otherwise the pointwise error
    |a_n - d_t^n v*| / (1 + |d_t^n v*|) on a grid over Omega is measured.
    """
    N = case.order if order is None else order
    system = case.system
    name = f"exact:{case.name}"
    try:
        series = taylor_coefficients(system, N, max_terms=max_terms)
    except ExpressionSwellError as exc:
        return Check(name, math.nan, case.tol, SKIP, {"reason": str(exc)})
    params = system.param_values()
    worst, canonical = 0.0, []
    for u, exact in case.exact_exprs().items():
        ep = to_poly(exact)
        for n in range(N + 1):
            target = _t_derivative_at_zero(ep, n)
            got = to_poly(series.coefficients[u][n])
            if got == target:
                canonical.append(True)
                continue
            canonical.append(False)
            worst = max(worst, _pointwise_error(got, target, case.omega, params))
    return Check(name, worst, case.tol, detail={"order": N, "canonical": all(canonical)})


def reference_check(case, n=128, K=4, kmax=None):
    """a_k against central differences of the method-of-lines solution."""
    system = case.system
    series = taylor_coefficients(system, K)
    mol = MethodOfLines(system, n=n, kmax=n // 6 if kmax is None else kmax)
    jets = fd_jet(mol, K)
    params = system.param_values()
    env = dict(params, x=mol.x)
    rows, worst = [], 0.0
    for k in range(1, K + 1):
        for u in system.unknowns:
            a = np.broadcast_to(np.asarray(Evaluator(env)(to_poly(series.coefficients[u][k])), dtype=float), mol.x.shape)
            est = jets[k]["values"][u]
            scale = float(np.max(np.abs(a))) or 1.0
            err = float(np.max(np.abs(a - est))) / scale
            worst = max(worst, err)
            rows.append({"k": k, "unknown": u, "relative_error": err, "step": jets[k]["step"]})
    return Check(f"reference:{case.name}", worst, case.tol, detail={"grid": n, "rows": rows})


# -- series identities ----------------------------------------------------------------


def _by_t_power(p, N):
    """Split a polynomial by powers of the variable t (degrees 0..N)."""
    out = [{} for _ in range(N + 1)]
    for mono, c in p.items():
        k, rest = 0, []
        for a, e in mono:
            if a == _T:
                k = e
            else:
                rest.append((a, e))
        if k <= N:
            out[k][tuple(rest)] = c
    return out


def equivalence_test(system, N, max_terms=None):
    """The three forms of the Cauchy problem agree on the truncated series.

    With v_N = sum_n t^n a_n / n! (a_n = A^n u, u still symbolic):
      (i)   d_t v_N = A v_N                       (A applied to the whole sum)
      (ii)  d_t v_N = F(x, v_N, D^a v_N)          (independent series composition)
      (iii) A v_N   = F(x, v_N, D^a v_N)
    each compared per power t^k, k <= N-1, after substituting initial data and
    s = 0.  Since the three are pairwise differences of two quantities,
    exactly one failing identity is impossible; that is checked as well.
    """
    op = _operator(system, max_terms)
    sys_ = op.system
    finish = substitution(sys_.init, variables={TIME_SYMBOL: 0}, strict=False)
    report = VerificationReport()
    label = "+".join(sys_.unknowns)

    iterates = {}
    for u in sys_.unknowns:
        cur = to_poly(Sym(u))
        its = [cur]
        for n in range(N):
            cur = op.poly(cur, order=n + 1)
            its.append(cur)
        iterates[u] = its

    t_poly = P.atom(_T)
    fails = {"i": 0, "ii": 0, "iii": 0}
    coeff_series = {}
    dt_side, a_side = {}, {}
    for u in sys_.unknowns:
        v = {}
        for n, it in enumerate(iterates[u]):
            P.add_into(v, P.mul(P.power(t_poly, n), it), Fraction(1, math.factorial(n)))
        dt_v = _by_t_power(P.spatial("t")(v), N - 1)
        a_v = _by_t_power(op.poly(v), N - 1)
        dt_side[u] = [finish(x) for x in dt_v]
        a_side[u] = [finish(x) for x in a_v]
        coeff_series[u] = Series([P.scale(finish(it), Fraction(1, math.factorial(n))) for n, it in enumerate(iterates[u])])

    clock = {}
    if sys_.time_dependent:
        clock[TIME_SYMBOL] = Series([{}, P.const(1)] + [{} for _ in range(N)])
    for u in sys_.unknowns:
        f_side = compose(sys_.rhs[u], coeff_series, N - 1, variables=clock).c
        for k in range(N):
            fails["i"] += dt_side[u][k] != a_side[u][k]
            fails["ii"] += dt_side[u][k] != f_side[k]
            fails["iii"] += a_side[u][k] != f_side[k]

    for key, desc in (("i", "dt v = A v"), ("ii", "dt v = F(v)"), ("iii", "A v = F(v)")):
        report.add(Check(f"equivalence:{label}:({key}) {desc}", fails[key], 0,
                         detail={"order": N, "mismatched_powers": fails[key]}))
    n_failed = sum(1 for v in fails.values() if v)
    report.add(Check(f"equivalence:{label}:consistency", float(n_failed == 1), 0,
                     detail={"identities_failed": n_failed}))
    return report


def homomorphism_test(system, g_list, F_outer, N, max_terms=None):
    """e^{tA} F(g_1..g_p) = F(e^{tA} g_1, ..., e^{tA} g_p) through t^N.

    ``F_outer`` is an expression (or text) in placeholders ``g`` or
    ``g1..gp``; ``g_list`` gives the expressions substituted for them.  The
    left side iterates A on F(g); the right side composes F with the per-g
    series using the independent series routines.
    """
    op = _operator(system, max_terms)
    names = ["g"] if len(g_list) == 1 else [f"g{i + 1}" for i in range(len(g_list))]
    if isinstance(F_outer, str):
        F_outer = parse_expr(F_outer, unknowns=names)
    gs = [parse_expr(g, unknowns=system.unknowns) if isinstance(g, str) else lift(g) for g in g_list]
    bind = substitution(dict(zip(names, gs)), strict=False)
    lhs, cur = [], bind(to_poly(F_outer))
    for k in range(N + 1):
        if k:
            cur = op.poly(cur, order=k)
        lhs.append(P.scale(cur, Fraction(1, math.factorial(k))))
    per_g = {}
    for name, g in zip(names, gs):
        cur, terms = to_poly(g), []
        for k in range(N + 1):
            if k:
                cur = op.poly(cur, order=k)
            terms.append(P.scale(cur, Fraction(1, math.factorial(k))))
        per_g[name] = Series(terms)
    rhs = compose(F_outer, per_g, N).c
    mism = sum(1 for k in range(N + 1) if lhs[k] != rhs[k])
    label = f"homomorphism:{'+'.join(system.unknowns)}:F={to_text(F_outer)}:g=[{', '.join(to_text(g) for g in gs)}]"
    return Check(label, mism, 0, detail={"order": N, "mismatched_powers": mism})


# -- algebraic properties on random expressions -----------------------------------------


def algebra_check(system, count, seed, max_depth=3):
    """Linearity, Leibniz rule and commutation with d/dx on random expressions."""
    op = _operator(system)
    gen = RandomExpressions(
        seed,
        unknowns=system.unknowns,
        params=tuple(sorted(system.params)) or ("c",),
        variables=system.space_vars,
        max_depth=max_depth,
    )
    dx = P.spatial(system.space_vars[0]) if system.space_vars else None
    fails = {"linearity": 0, "leibniz": 0, "commutation": 0}
    for _ in range(count):
        e1, e2 = to_poly(gen()), to_poly(gen())
        c = Fraction(gen.rng.randint(-9, 9) or 1, gen.rng.randint(1, 5))
        A1, A2 = op.poly(e1), op.poly(e2)
        lin = op.poly(P.add(P.scale(e1, c), e2))
        fails["linearity"] += lin != P.add(P.scale(A1, c), A2)
        leib = op.poly(P.mul(e1, e2))
        fails["leibniz"] += leib != P.add(P.mul(A1, e2), P.mul(e1, A2))
        if dx is not None:
            fails["commutation"] += op.poly(dx(e1)) != dx(A1)
    return VerificationReport(
        Check(f"algebra:{k}", v, 0, detail={"expressions": count, "seed": seed}) for k, v in fails.items()
    )


# -- residual of the cutoff sum --------------------------------------------------------------


def residual(system, series, t_samples, omega=(), x_count=33, params=None, tol=1e-8, samples=2048):
    """|d_t v - F(x, v, D^a v)| for the cutoff-damped sum v of each unknown.

    Spatial jets are summed term-wise from exact derivatives of b_n; the t
    derivative uses psi' in closed form.  Only t = 0 rows carry a pass flag
    that can fail.
    """
    params = dict(system.param_values() if params is None else params)
    mol = {u: MollifiedSeries.from_series(series, u, omega=omega, params=params, samples=samples)
           for u in system.unknowns}
    xs = _grid(omega, x_count)
    polys = {u: to_poly(system.rhs[u]) for u in system.unknowns}
    needed = sorted({(a[1], a[2]) for p in polys.values() for a in P.atoms_of(p) if a[0] in (P.UNKNOWN, P.DERIV)})
    rows = []
    for t in t_samples:
        jets, dts = {}, {}
        for u, m in mol.items():
            dv = 0.0
            for n in range(1, m.order + 1):
                b = m.term(n).values(xs)
                r = m.r[n]
                dv = dv + b * (n * t ** (n - 1) * cutoff_eval(t / r) + t**n * cutoff_derivative(t / r) / r)
            dts[u] = dv
        for name, alpha in needed:
            m = mol[name]
            i = sum(c for _, c in alpha)
            acc = 0.0
            for n in range(m.order + 1):
                term = m.term(n).values(xs, i) * t**n
                if n:
                    term = term * cutoff_eval(t / m.r[n])
                acc = acc + term
            jets[(name, alpha)] = acc
        env = dict(params, x=xs, **{TIME_SYMBOL: t})
        ev = Evaluator(env, jets)
        for u in system.unknowns:
            res = float(np.max(np.abs(dts[u] - ev(polys[u]))))
            base = t == 0
            rows.append({"t": t, "unknown": u, "residual": res, "asserted": base,
                         "pass": (res <= tol) if base else True})
    return rows
