"""Reference time integrators and finite-difference jets at t = 0.

One-dimensional symbolic systems are integrated by the method of lines with
Fourier derivatives on a periodic grid; Navier-Stokes uses a pseudo-spectral
projection method written independently of the coefficient recursion.  Both
use the classical fourth-order Runge-Kutta step.
"""

from __future__ import annotations

import math

import numpy as np

from ..borel import central_weights
from ..expr import Evaluator, evaluate, to_poly
from ..expr import poly as P
from ..spectral import Field, PeriodicGrid
from ..system import TIME_SYMBOL

__all__ = [
    "InstabilityError",
    "MethodOfLines",
    "fd_jet",
    "ns_fd_coefficients",
    "ns_integrate",
    "ns_reference_rhs",
    "reference_integrate",
    "rk4",
]


class InstabilityError(RuntimeError):
    pass


def rk4(f, y, t, dt, steps, growth=1e6):
    """``steps`` RK4 steps of size ``dt`` for y' = f(y, t); y is an array or dict."""
    is_dict = isinstance(y, dict)
    scale = _norm(y, is_dict) or 1.0

    def comb(a, b, c):
        if is_dict:
            return {k: a[k] + c * b[k] for k in a}
        return a + c * b

    for _ in range(steps):
        k1 = f(y, t)
        k2 = f(comb(y, k1, dt / 2), t + dt / 2)
        k3 = f(comb(y, k2, dt / 2), t + dt / 2)
        k4 = f(comb(y, k3, dt), t + dt)
        if is_dict:
            y = {k: y[k] + dt / 6 * (k1[k] + 2 * k2[k] + 2 * k3[k] + k4[k]) for k in y}
        else:
            y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += dt
        n = _norm(y, is_dict)
        if not math.isfinite(n) or n > growth * scale:
            raise InstabilityError(f"solution norm {n:.3e} blew up at t={t:.4g}; use a smaller dt")
    return y


def _norm(y, is_dict):
    if is_dict:
        return max((float(np.max(np.abs(v))) for v in y.values()), default=0.0)
    return float(np.max(np.abs(y)))


class MethodOfLines:
    """Semi-discretization of a system with dim <= 1 on ``n`` periodic points.

    ``kmax`` applies a sharp Fourier low-pass to the right-hand side, which
    keeps rounding noise in unresolved modes from being amplified when the
    integration runs backward in time through a diffusive term.
    """

    def __init__(self, system, n=128, kmax=None, params=None):
        if system.dim > 1:
            raise ValueError("method of lines supports dim 0 or 1")
        if system.uses_pressure():
            raise ValueError("the pressure marker needs the Navier-Stokes integrator")
        self.system = system
        self.params = dict(system.param_values() if params is None else params)
        if system.dim == 1:
            self.grid = PeriodicGrid(n)
            self.x = self.grid.coords[0]
        else:
            self.grid = None
            self.x = np.zeros(1)
        self.kmax = kmax
        self.polys = {u: to_poly(system.rhs[u]) for u in system.unknowns}
        self.jets = sorted({
            (a[1], a[2])
            for p in self.polys.values()
            for a in P.atoms_of(p)
            if a[0] in (P.UNKNOWN, P.DERIV)
        })

    def initial(self):
        env = dict(self.params)
        if self.grid is not None:
            env["x"] = self.x
        out = {}
        for u in self.system.unknowns:
            v = np.asarray(evaluate(self.system.init[u], env), dtype=float)
            out[u] = np.broadcast_to(v, self.x.shape).copy()
        return out

    def _filter(self, a):
        if self.kmax is None or self.grid is None:
            return a
        return self.grid.lowpass(a, self.kmax)

    def rhs(self, state, t):
        jets = {}
        for name, alpha in self.jets:
            order = sum(c for _, c in alpha)
            jets[(name, alpha)] = state[name] if order == 0 else self.grid.diff(state[name], 0, order)
        env = dict(self.params)
        env[TIME_SYMBOL] = t
        if self.grid is not None:
            env["x"] = self.x
        ev = Evaluator(env, jets)
        return {u: self._filter(np.broadcast_to(np.asarray(ev(p), dtype=float), self.x.shape)) for u, p in self.polys.items()}

    def integrate(self, t_end, dt, state=None, t0=0.0):
        state = self.initial() if state is None else state
        steps = max(1, round(abs(t_end - t0) / abs(dt)))
        h = (t_end - t0) / steps
        return rk4(self.rhs, state, t0, h, steps)

    def trajectory(self, times, substeps):
        """States at t0=0 and each of ``times`` (monotone, same sign)."""
        out, state, t = [], self.initial(), 0.0
        for tt in times:
            state = rk4(self.rhs, state, t, (tt - t) / substeps, substeps)
            t = tt
            out.append(state)
        return out


def fd_jet(mol, K, steps=(0.04, 0.02, 0.01), m=4, substeps=50):
    """Central-difference estimates of d^k v / dt^k at t = 0, k = 0..K.

    For each candidate step h the solution is sampled at j h, j = -m..m, and
    the exact (2m+1)-point weights are applied.  Per k, the estimate from the
    consecutive pair of steps that agree best is returned along with that
    disagreement (Richardson-style step selection).
    """
    if K > 2 * m:
        raise ValueError("increase m for this derivative order")
    v0 = mol.initial()
    per_h = []
    for h in steps:
        fwd = mol.trajectory([j * h for j in range(1, m + 1)], substeps)
        bwd = mol.trajectory([-j * h for j in range(1, m + 1)], substeps)
        samples = {0: v0}
        for j in range(1, m + 1):
            samples[j] = fwd[j - 1]
            samples[-j] = bwd[j - 1]
        est = {}
        for k in range(K + 1):
            w = [float(x) for x in central_weights(k, m)] if k else None
            est[k] = {
                u: v0[u] if k == 0 else sum(w[j + m] * samples[j][u] for j in range(-m, m + 1)) / h**k
                for u in v0
            }
        per_h.append(est)
    best = {}
    for k in range(K + 1):
        choice = None
        for i in range(len(steps) - 1):
            diff = max(float(np.max(np.abs(per_h[i][k][u] - per_h[i + 1][k][u]))) for u in v0)
            if choice is None or diff < choice[0]:
                choice = (diff, i + 1)
        if choice is None:
            choice = (math.nan, 0)
        best[k] = {"values": per_h[choice[1]][k], "step": steps[choice[1]], "disagreement": choice[0]}
    return best


# -- Navier-Stokes ------------------------------------------------------------------------


def ns_reference_rhs(grid, u, nu):
    """P[nu Delta u - (u . grad) u] with the Leray projector P, dealiased."""
    d = grid.dim
    u_hat = grid.fft(u) * grid.keep
    uf = grid.ifft(u_hat)
    adv = np.zeros_like(uf)
    for j in range(d):
        dj = grid.ifft(grid.ik[j] * u_hat)
        adv += uf[j] * dj
    r_hat = -nu * grid.k2 * u_hat - grid.fft(adv) * grid.keep
    kr = sum(grid.k[j] * r_hat[j] for j in range(d))
    r_hat = np.stack([r_hat[i] - grid.k[i] * kr * grid.inv_k2 for i in range(d)])
    return grid.ifft(r_hat)


def ns_integrate(u0, nu, t_end, dt):
    grid = u0.grid
    steps = max(1, round(abs(t_end) / abs(dt)))
    h = t_end / steps
    y = rk4(lambda y, t: ns_reference_rhs(grid, y, nu), grid.dealias(u0.data), 0.0, h, steps)
    return Field(grid, y)


def ns_fd_coefficients(u0, nu, h=1e-4):
    """(a1, a2) from one RK4 step forward and back: central first and second differences."""
    grid = u0.grid
    v0 = grid.dealias(u0.data)
    vp = ns_integrate(u0, nu, h, h).data
    vm = ns_integrate(u0, nu, -h, h).data
    return Field(grid, (vp - vm) / (2 * h)), Field(grid, (vp - 2 * v0 + vm) / h**2)


def reference_integrate(target, t_end, dt, nu=None, n=64, kmax=None):
    """Integrate a 1D system (method of lines) or a velocity Field (Navier-Stokes)."""
    if isinstance(target, Field):
        if nu is None:
            raise ValueError("nu is required for Navier-Stokes integration")
        return ns_integrate(target, nu, t_end, dt)
    return MethodOfLines(target, n=n, kmax=kmax).integrate(t_end, dt)
