"""Incompressible Navier-Stokes in Leray form on the periodic box.

The pressure is eliminated through the Poisson equation
Delta p = -sum_ij d_i u_j d_j u_i, solved spectrally with zero mean.  The time
Taylor coefficients a_n = A^n u follow from the Leibniz rule applied to the
quadratic terms, which gives a binomial convolution over lower coefficients.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .expr import Pressure, symbols
from .spectral import Field, PeriodicGrid, write_field, write_json

__all__ = [
    "DivergenceError",
    "NSCoefficients",
    "divergence",
    "leray_project",
    "ns_rhs",
    "ns_taylor_coefficients",
    "pressure_solve",
    "pressure_symbolic",
    "random_band_limited",
    "taylor_green_2d",
    "taylor_green_3d",
]

DOMAIN_NOTE = "2pi-periodic torus, spectral inverse Laplacian, zero-mean pressure gauge"


class DivergenceError(ValueError):
    def __init__(self, n, value, bound):
        super().__init__(f"coefficient a{n}: divergence {value:.3e} exceeds {bound:.3e}")
        self.n = n
        self.value = value
        self.bound = bound


def _check_vector(u):
    d = u.grid.dim
    if d not in (2, 3) or u.ncomp != d:
        raise ValueError(f"expected a {d}-component velocity on a 2D or 3D grid, got {u.ncomp}")


def _gradients(grid, a):
    """g[j][i] = d_j a_i, each dealiased spectral derivative."""
    a_hat = grid.fft(a) * grid.keep
    return [[grid.ifft(grid.ik[j] * a_hat[i]) for i in range(a.shape[0])] for j in range(grid.dim)]


def _truncate_hat(grid, a):
    return grid.fft(a) * grid.keep


def _filter_noise(a_hat, level, *parts):
    """Zero modes below ``level`` times the largest mode of ``a_hat`` or of
    the ``parts`` it was summed from (roundoff hygiene).

    Each recursion step multiplies high modes by roughly nu|k|^2 + |k||u|, so
    rounding noise in modes the exact coefficient does not carry would grow
    by orders of magnitude per step.
    """
    if not level:
        return a_hat
    mag = np.abs(a_hat)
    top = max([mag.max()] + [np.abs(p).max() for p in parts])
    return np.where(mag > level * top, a_hat, 0.0) if top > 0 else a_hat


def divergence(u):
    """Spectral sum_j d_j u_j as a scalar field."""
    grid = u.grid
    u_hat = grid.fft(u.data)
    return Field(grid, grid.ifft(sum(grid.ik[j] * u_hat[j] for j in range(grid.dim))))


def leray_project(u):
    """Remove the gradient part: u_hat - k (k . u_hat) / |k|^2."""
    grid = u.grid
    u_hat = grid.fft(u.data)
    kdotu = sum(grid.k[j] * u_hat[j] for j in range(grid.dim))
    out = np.stack([u_hat[i] - grid.k[i] * kdotu * grid.inv_k2 for i in range(grid.dim)])
    return Field(grid, grid.ifft(out))


def _pressure_hat(grid, pairs, extra_div_hat=None):
    """Solve Delta p = -sum over (c, g, h) of c * sum_ij g[i][j] * h[j][i]."""
    src = np.zeros(grid.shape)
    for c, g, h in pairs:
        for i in range(grid.dim):
            for j in range(grid.dim):
                src += c * g[i][j] * h[j][i]
    src_hat = _truncate_hat(grid, src)
    if extra_div_hat is not None:
        src_hat = src_hat - extra_div_hat
    # -|k|^2 p_hat = -src_hat
    return src_hat * grid.inv_k2


def pressure_solve(u):
    """Zero-mean p with Delta p = -sum_ij d_i u_j d_j u_i."""
    _check_vector(u)
    grid = u.grid
    g = _gradients(grid, u.data)
    return Field(grid, grid.ifft(_pressure_hat(grid, [(1.0, g, g)])))


def ns_rhs(u, nu, force=None):
    """nu Delta u - (u . grad) u - grad p (+ force), dealiased."""
    coeffs = ns_taylor_coefficients(u, nu, 1, force=None if force is None else [force], check=False)
    return coeffs.a[1]


@dataclass
class NSCoefficients:
    """Sampled a_0..a_N with their divergence diagnostics."""

    grid: PeriodicGrid
    nu: float
    a: list
    divergence: list = field(default_factory=list)
    scale: list = field(default_factory=list)

    @property
    def order(self):
        return len(self.a) - 1

    def manifest(self, files=None):
        return {
            "grid": list(self.grid.shape),
            "nu": self.nu,
            "N": self.order,
            "domain": DOMAIN_NOTE,
            "coefficients": [
                {
                    "n": n,
                    "max_norm": a.max_norm(),
                    "divergence_max": self.divergence[n],
                    "file": None if files is None else files[n],
                }
                for n, a in enumerate(self.a)
            ],
        }

    def save(self, out_dir, stem="a"):
        os.makedirs(out_dir, exist_ok=True)
        files = []
        for n, a in enumerate(self.a):
            name = f"{stem}{n}.bin"
            write_field(os.path.join(out_dir, name), a)
            files.append(name)
        manifest = self.manifest(files)
        write_json(os.path.join(out_dir, "manifest.json"), manifest)
        return manifest


def ns_taylor_coefficients(u0, nu, N, force=None, tol=1e-10, check=True, noise_filter=1e-13):
    """Time-Taylor coefficients of the Leray-form Navier-Stokes solution.

    a_{n+1} = nu Delta a_n - sum_k C(n,k) (a_k . grad) a_{n-k} - grad p_n + f_n
    with Delta p_n = -sum_k C(n,k) sum_ij d_i (a_k)_j d_j (a_{n-k})_i + div f_n.
    ``force`` is an optional sequence (or callable n -> Field) of force jets
    f_n = d_t^n f at t = 0.  The input is dealiased first; every product is
    truncated to the retained modes.  With ``check`` each a_n must satisfy
    max|div a_n| <= tol * scale_n, where scale_n bounds the terms that cancel
    in forming a_n.  ``noise_filter`` (relative spectral threshold, 0 to
    disable) is applied to every coefficient.
    """
    _check_vector(u0)
    if N < 0:
        raise ValueError("order must be non-negative")
    if nu < 0:
        raise ValueError("viscosity must be non-negative")
    grid = u0.grid
    d = grid.dim
    a0 = grid.ifft(_filter_noise(grid.fft(u0.data) * grid.keep, noise_filter))
    a = [a0]
    grads = [_gradients(grid, a0)]
    div0 = divergence(Field(grid, a0)).max_norm()
    divs, scales = [div0], [float(np.max(np.abs(a0)))]
    if check and div0 > tol * max(scales[0], 1e-300) and scales[0] > 0:
        raise DivergenceError(0, div0, tol * scales[0])

    for n in range(N):
        adv = np.zeros_like(a0)
        for k in range(n + 1):
            c = comb(n, k)
            ak, gk = a[k], grads[n - k]
            for i in range(d):
                adv[i] += c * sum(ak[j] * gk[j][i] for j in range(d))
        adv_hat = _truncate_hat(grid, adv)
        an_hat = grid.fft(a[n])
        visc_hat = -nu * grid.k2 * an_hat

        f_hat = None
        if force is not None:
            fn = force(n) if callable(force) else (force[n] if n < len(force) else None)
            if fn is not None:
                f_hat = grid.fft(fn.data) * grid.keep
        pairs = [(float(comb(n, k)), grads[k], grads[n - k]) for k in range(n + 1)]
        extra = None if f_hat is None else sum(grid.ik[j] * f_hat[j] for j in range(d))
        p_hat = _pressure_hat(grid, pairs, extra)

        nxt_hat = np.stack([visc_hat[i] - adv_hat[i] - grid.ik[i] * p_hat for i in range(d)])
        if f_hat is not None:
            nxt_hat = nxt_hat + f_hat
        grad_p = np.stack([grid.ik[i] * p_hat for i in range(d)])
        nxt_hat = _filter_noise(nxt_hat, noise_filter, visc_hat, adv_hat, grad_p)
        nxt = grid.ifft(nxt_hat)

        div = float(np.max(np.abs(grid.ifft(sum(grid.ik[j] * nxt_hat[j] for j in range(d))))))
        scale = max(
            float(np.max(np.abs(nxt))),
            float(np.max(np.abs(grid.ifft(visc_hat)))),
            float(np.max(np.abs(grid.ifft(adv_hat)))),
        )
        if check and div > tol * scale:
            raise DivergenceError(n + 1, div, tol * scale)
        a.append(nxt)
        grads.append(_gradients(grid, nxt))
        divs.append(div)
        scales.append(scale)

    return NSCoefficients(grid, float(nu), [Field(grid, x) for x in a], divs, scales)


def pressure_symbolic(system):
    """The leray_pressure marker of an NSE-style system (display only)."""
    for f in system.rhs.values():
        fields = symbols(f)["pressure"]
        if fields:
            return Pressure(sorted(fields)[0])
    dim = system.dim
    return Pressure(system.unknowns[:dim])


# -- initial fields -------------------------------------------------------------------


def taylor_green_2d(grid):
    """u = (cos x sin y, -sin x cos y)."""
    x, y = grid.coords
    return Field(grid, np.stack([np.cos(x) * np.sin(y), -np.sin(x) * np.cos(y)]))


def taylor_green_3d(grid):
    """u = (sin x cos y cos z, -cos x sin y cos z, 0)."""
    x, y, z = grid.coords
    return Field(
        grid,
        np.stack([np.sin(x) * np.cos(y) * np.cos(z), -np.cos(x) * np.sin(y) * np.cos(z), np.zeros_like(x)]),
    )


def random_band_limited(grid, seed, kmax=2):
    """Seeded divergence-free field with modes |k_j| <= kmax, max norm 1."""
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((grid.dim, *grid.shape))
    smooth = grid.lowpass(raw, kmax)
    u = leray_project(Field(grid, smooth))
    return u * (1.0 / u.max_norm())
