"""Cutoff-damped summation of a formal time series.

Given coefficients b_n(x) on a box Omega, the function

    v(t, x) = sum_n b_n(x) t^n psi(t / r_n),   r_n = 1 / (n! (1 + beta_n)),

with beta_n = max over 0 < i < n of sup |d^i b_n / dx^i| on the closure of
Omega, is smooth and has the series as its Taylor expansion at t = 0.  This
module builds v, estimates the norms by sampling, and checks the tail
estimates and the jet identity numerically.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .expr import evaluate, from_poly, lift, spatial_derivative, to_poly
from .expr import poly as P

__all__ = [
    "MollifiedSeries",
    "beta_n",
    "cutoff_derivative",
    "cutoff_eval",
    "cutoff_derivative_bound",
    "mollified_eval",
    "radius",
    "tail_bound_check",
    "taylor_jet_check",
    "taylor_sum",
]


# -- the cutoff --------------------------------------------------------------------


def _h_scalar(s):
    return math.exp(-1.0 / s) if s > 0 else 0.0


def cutoff_eval(t):
    """psi(t): 1 on |t| <= 1/2, 0 on |t| >= 1, smooth bump quotient between.

    Accepts Python/numpy scalars, numpy arrays and mpmath numbers.
    """
    if isinstance(t, (mpmath.mpf, mpmath.mpc)):
        a = abs(t)
        if a <= mpmath.mpf(1) / 2:
            return mpmath.mpf(1)
        if a >= 1:
            return mpmath.mpf(0)
        ha = mpmath.exp(-1 / (2 - 2 * a))
        hb = mpmath.exp(-1 / (2 * a - 1))
        return ha / (ha + hb)
    if np.ndim(t):
        a = np.abs(np.asarray(t, dtype=float))
        out = np.zeros_like(a)
        out[a <= 0.5] = 1.0
        mid = (a > 0.5) & (a < 1.0)
        am = a[mid]
        ha = np.exp(-1.0 / (2.0 - 2.0 * am))
        hb = np.exp(-1.0 / (2.0 * am - 1.0))
        out[mid] = ha / (ha + hb)
        return out
    a = abs(float(t))
    if a <= 0.5:
        return 1.0
    if a >= 1.0:
        return 0.0
    ha = _h_scalar(2.0 - 2.0 * a)
    hb = _h_scalar(2.0 * a - 1.0)
    return ha / (ha + hb)


def cutoff_derivative(t):
    """psi'(t), closed form; vectorized over numpy input."""
    t = np.asarray(t, dtype=float)
    a = np.abs(t)
    out = np.zeros_like(a)
    mid = (a > 0.5) & (a < 1.0)
    am = a[mid]
    p, q = 2.0 - 2.0 * am, 2.0 * am - 1.0
    ha, hb = np.exp(-1.0 / p), np.exp(-1.0 / q)
    # d/d|t| of ha/(ha+hb) with ha' = -2 ha/p^2, hb' = 2 hb/q^2
    out[mid] = -2.0 * ha * hb * (1.0 / p**2 + 1.0 / q**2) / (ha + hb) ** 2
    out = out * np.sign(t)
    return out if out.ndim else float(out)


_TAU = np.linspace(0.0, 1.0, 200001)


def cutoff_derivative_bound():
    """M1 = max |psi'| estimated on a fine grid over the transition."""
    return float(np.max(np.abs(cutoff_derivative(_TAU))))


def radius(n, beta):
    """r_n = 1 / (n! (1 + beta_n)); defined for n >= 1."""
    if n < 1:
        raise ValueError("radius is defined for n >= 1")
    if beta < 0:
        raise ValueError("beta must be non-negative")
    return 1.0 / (math.factorial(n) * (1.0 + beta))


# -- coefficients on Omega -----------------------------------------------------------


def _omega(omega):
    if omega is None or len(omega) == 0:
        return ()
    if len(omega) != 2:
        raise ValueError("Omega must be an interval (a, b) or empty for x-independent series")
    a, b = float(omega[0]), float(omega[1])
    if not a < b:
        raise ValueError("Omega must have a < b")
    return (a, b)


class _Symbolic:
    """Closed-form coefficient in x with exact derivatives."""

    def __init__(self, expr, params, var):
        self.expr = lift(expr)
        self.params = params
        self.var = var
        self._derivs = [self.expr]

    def deriv(self, i):
        while len(self._derivs) <= i:
            self._derivs.append(spatial_derivative(self._derivs[-1], self.var))
        return self._derivs[i]

    def values(self, xs, i=0):
        env = dict(self.params)
        if self.var is not None:
            env[self.var] = xs
        v = np.asarray(evaluate(self.deriv(i), env), dtype=float)
        return np.broadcast_to(v, np.shape(xs)) if np.ndim(xs) else v

    def is_zero(self, i=0):
        return not to_poly(self.deriv(i))


class _Sampled:
    """Coefficient given by periodic samples on [a, b); spectral derivatives."""

    def __init__(self, data, omega):
        self.data = np.asarray(data, dtype=float)
        self.a, self.b = omega
        n = self.data.size
        self.hat = np.fft.rfft(self.data) / n
        k = np.fft.rfftfreq(n, 1.0 / n) * (2 * np.pi / (self.b - self.a))
        if n % 2 == 0:
            self.nyq = self.hat.size - 1
        else:
            self.nyq = None
        self.k = k

    def values(self, xs, i=0):
        sym = (1j * self.k) ** i * self.hat
        if i % 2 and self.nyq is not None:
            sym[self.nyq] = 0.0
        xs = np.asarray(xs, dtype=float)
        phase = np.exp(1j * np.outer(xs - self.a, self.k))
        weights = np.full(self.k.size, 2.0)
        weights[0] = 1.0
        if self.nyq is not None:
            weights[self.nyq] = 1.0
        return np.real(phase @ (weights * sym))

    def is_zero(self, i=0):
        return not np.any(self.data)


def _sample_points(omega, samples):
    a, b = omega
    return np.linspace(a, b, samples)


@dataclass
class MollifiedSeries:
    """Cutoff-damped series data: b_n, Omega, beta_n and r_n.

    ``coefficients`` holds b_0..b_N as expressions in ``x`` (or constants)
    or as sampled arrays on a periodic grid over Omega.  ``samples`` is the
    base sampling density for sup estimates; each estimate also uses the
    nested 2x refinement.  ``inflation`` scales sampled sups by (1 +
    inflation).
    """

    coefficients: list
    omega: tuple = ()
    params: dict = field(default_factory=dict)
    samples: int = 2048
    inflation: float = 0.0
    beta: list = field(default_factory=list)
    r: list = field(default_factory=list)

    def __post_init__(self):
        self.omega = _omega(self.omega)
        var = "x" if self.omega else None
        self.params = {k: float(v) for k, v in (self.params or {}).items()}
        self._terms = []
        for c in self.coefficients:
            if isinstance(c, np.ndarray) and c.ndim == 1 and c.size > 1:
                if not self.omega:
                    raise ValueError("sampled coefficients need an interval Omega")
                self._terms.append(_Sampled(c, self.omega))
            else:
                self._terms.append(_Symbolic(c, self.params, var))
        self.M1 = cutoff_derivative_bound()
        self.beta = [0.0] + [beta_n(self, n) for n in range(1, self.order + 1)]
        self.r = [None] + [radius(n, self.beta[n]) for n in range(1, self.order + 1)]

    @property
    def order(self):
        return len(self.coefficients) - 1

    @classmethod
    def from_series(cls, series, unknown=None, omega=(), params=None, **kw):
        """b_n = a_n / n! from a :class:`~cauchyop.derivation.CoefficientSeries`."""
        unknown = unknown or series.unknowns[0]
        if params is None:
            params = series.system.param_values()
        b = [
            from_poly(P.scale(to_poly(c), Fraction(1, math.factorial(n))))
            for n, c in enumerate(series.coefficients[unknown])
        ]
        return cls(b, omega=omega, params=params, **kw)

    def term(self, n):
        return self._terms[n]

    def sup(self, n, i=0, samples=None):
        """Sampled sup over the closure of Omega of |b_n^(i)|, with refinement."""
        t = self._terms[n]
        if not self.omega:
            if i > 0:
                return 0.0
            return float(abs(t.values(np.float64(0.0))))
        if t.is_zero(i):
            return 0.0
        m = samples or self.samples
        best = 0.0
        for pts in (m, 2 * m - 1):
            v = t.values(_sample_points(self.omega, pts), i)
            if not np.all(np.isfinite(v)):
                raise FloatingPointError(f"non-finite sample of b_{n} derivative {i}")
            best = max(best, float(np.max(np.abs(v))))
        return best * (1.0 + self.inflation)

    def values(self, n, x):
        if self.omega:
            a, b = self.omega
            xa = np.asarray(x, dtype=float)
            if np.any(xa < a) or np.any(xa > b):
                raise ValueError(f"x outside the closure of Omega = [{a}, {b}]")
        return self._terms[n].values(x)

    def to_dict(self):
        return {
            "N": self.order,
            "omega": list(self.omega),
            "samples": self.samples,
            "inflation": self.inflation,
            "M1": self.M1,
            "beta": self.beta,
            "r": self.r,
        }


def beta_n(series, n, samples=None):
    """max over 0 < i < n of the sampled sup of |b_n^(i)|; beta_1 = 0."""
    if n < 1:
        raise ValueError("beta_n is defined for n >= 1")
    return max((series.sup(n, i, samples) for i in range(1, n)), default=0.0)


# -- evaluation ------------------------------------------------------------------------


def _sum(series, t, x, cut):
    total = 0.0
    for n in range(series.order + 1):
        term = series.values(n, x) * t**n
        if cut and n:
            term = term * cutoff_eval(t / series.r[n])
        total = total + term
    return float(total) if np.ndim(total) == 0 else total


def mollified_eval(series, t, x=0.0):
    """sum_n b_n(x) t^n psi(t / r_n); the n = 0 term is never damped.

    On |t| <= min r_n / 2 every factor is exactly 1.0, so the result is
    bit-identical to :func:`taylor_sum`.
    """
    return _sum(series, t, x, True)


def taylor_sum(series, t, x=0.0):
    """Plain truncated sum_n b_n(x) t^n, same floating-point order."""
    return _sum(series, t, x, False)


def plateau(series):
    """Largest |t| on which no cutoff is active."""
    return min(series.r[1:], default=math.inf) / 2


# -- checks ------------------------------------------------------------------------------


def _sup_tau(n):
    """sup over tau in [0, 1] of tau^n psi(tau) and of |n tau^(n-1) psi + tau^n psi'|."""
    psi = cutoff_eval(_TAU)
    dpsi = cutoff_derivative(_TAU)
    f = _TAU**n * psi
    g = n * _TAU ** (n - 1) * psi + _TAU**n * dpsi
    return float(np.max(np.abs(f))), float(np.max(np.abs(g)))


def tail_bound_check(series, i, samples=None):
    """Check the lemma's estimates for the i-th x-derivative of the tail.

    lhs  = sum_{n=i+1}^N sup_{t,x} |b_n^(i)(x) t^n psi(t/r_n)|  <=  sum 1/n!
    lhs' = sum_{n=i+1}^N sup_{t,x} |d/dt (b_n^(i)(x) t^n psi(t/r_n))|  <=  sum (n+M1)/n!

    The sup over t in [-r_n, r_n] factors out as r_n^n sup tau^n psi(tau)
    (and r_n^(n-1) sup |n tau^(n-1) psi + tau^n psi'| for the derivative).
    """
    N = series.order
    rows = []
    lhs = rhs = dlhs = drhs = 0.0
    for n in range(i + 1, N + 1):
        sb = series.sup(n, i, samples)
        r = series.r[n]
        ft, gt = _sup_tau(n)
        term = sb * r**n * ft
        dterm = sb * r ** (n - 1) * gt
        bound = 1.0 / math.factorial(n)
        dbound = (n + series.M1) / math.factorial(n)
        rows.append({
            "n": n, "sup_b": sb, "beta": series.beta[n], "r": r,
            "term": term, "bound": bound, "dterm": dterm, "dbound": dbound,
        })
        lhs += term
        rhs += bound
        dlhs += dterm
        drhs += dbound
    return {
        "i": i,
        "N": N,
        "lhs": lhs,
        "rhs": rhs,
        "pass": bool(lhs <= rhs and dlhs <= drhs),
        "derivative": {"lhs": dlhs, "rhs": drhs, "M1": series.M1, "pass": bool(dlhs <= drhs)},
        "terms": rows,
    }


def central_weights(k, m):
    """Exact weights w_j, j = -m..m, with sum w_j f(jh) / h^k -> f^(k)(0).

    Exact for polynomials of degree <= 2m.
    """
    if k > 2 * m:
        raise ValueError("stencil too narrow for this derivative order")
    nodes = [Fraction(j) for j in range(-m, m + 1)]
    size = len(nodes)
    # Vandermonde system sum_j w_j j^p = k! [p == k], p = 0..2m
    rows = [[x**p for x in nodes] + [Fraction(math.factorial(k)) if p == k else Fraction(0)]
            for p in range(size)]
    for col in range(size):
        piv = next(r for r in range(col, size) if rows[r][col] != 0)
        rows[col], rows[piv] = rows[piv], rows[col]
        pv = rows[col][col]
        rows[col] = [v / pv for v in rows[col]]
        for r in range(size):
            if r != col and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
    return [rows[j][-1] for j in range(size)]


def taylor_jet_check(series, K, points=None, tol=1e-6):
    """Compare d^k/dt^k v(0, x) with k! b_k(x) for k <= K.

    Derivatives use a central stencil of half-width ceil(N/2), exact for the
    degree-N polynomial that v reduces to on the plateau, with every node
    inside the plateau and mpmath precision chosen to absorb cancellation.
    """
    N = series.order
    if K > N:
        raise ValueError("K must not exceed the series order")
    if points is None:
        points = np.linspace(*series.omega, 9) if series.omega else np.array([0.0])
    m = max(1, math.ceil(N / 2))
    h_float = plateau(series) / (2 * m) if N else 0.5
    h = mpmath.mpf(h_float)
    digits = int(30 + max(K, 1) * max(0.0, -math.log10(h_float)))
    rows = []
    worst = 0.0
    with mpmath.workdps(digits):
        h = mpmath.mpf(h_float)
        for x in points:
            b = [mpmath.mpf(float(series.values(n, x))) for n in range(N + 1)]

            def v(t):
                total = mpmath.mpf(0)
                for n in range(N + 1):
                    term = b[n] * t**n
                    if n:
                        term *= cutoff_eval(t / mpmath.mpf(series.r[n]))
                    total += term
                return total

            vals = {j: v(j * h) for j in range(-m, m + 1)}
            for k in range(K + 1):
                if k == 0:
                    d = vals[0]
                else:
                    w = central_weights(k, m)
                    d = sum(mpmath.mpf(wj.numerator) / wj.denominator * vals[j - m] for j, wj in enumerate(w))
                    d /= h**k
                exact = math.factorial(k) * b[k]
                err = float(abs(d - exact))
                scale = float(abs(exact))
                rel = err / scale if scale > 0 else err
                worst = max(worst, rel)
                rows.append({"x": float(x), "k": k, "jet": float(d), "expected": float(exact), "error": rel})
    return {"K": K, "N": N, "step": h_float, "max_error": worst, "tol": tol, "pass": bool(worst <= tol), "rows": rows}


# -- output ------------------------------------------------------------------------------


def lattice_csv(series, ts, xs):
    """CSV text of (t, x, v) over a lattice; repr-exact floats."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "x", "v"])
    for t in ts:
        for x in xs:
            w.writerow([repr(float(t)), repr(float(x)), repr(float(mollified_eval(series, float(t), float(x))))])
    return buf.getvalue()


def radii_table(series):
    rows = [{"n": n, "beta": series.beta[n], "r": series.r[n]} for n in range(1, series.order + 1)]
    return json.dumps(rows, indent=2, sort_keys=True)
