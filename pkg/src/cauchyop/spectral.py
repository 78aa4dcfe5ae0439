"""Periodic grids, sampled fields and Fourier differentiation on [0, 2pi)^d."""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

__all__ = ["Field", "PeriodicGrid", "read_field", "write_field", "write_field_csv"]


def _is_pow2(n):
    return n >= 2 and n & (n - 1) == 0


class PeriodicGrid:
    """Uniform grid on the 2pi-periodic box with real-FFT wavenumbers.

    ``dealias`` keeps modes with |k_j| <= (N_j - 1) // 3 on every axis, so the
    product of two retained fields aliases only into discarded modes.
    """

    def __init__(self, shape):
        shape = (shape,) if np.ndim(shape) == 0 else tuple(int(n) for n in shape)
        if not 1 <= len(shape) <= 3:
            raise ValueError("grid dimension must be 1, 2 or 3")
        for n in shape:
            if not _is_pow2(n):
                raise ValueError(f"grid size {n} is not a power of two")
        self.shape = shape
        self.dim = len(shape)
        self.spacing = tuple(2 * np.pi / n for n in shape)
        self.size = int(np.prod(shape))

        ks = [np.fft.fftfreq(n, 1.0 / n) for n in shape[:-1]]
        ks.append(np.fft.rfftfreq(shape[-1], 1.0 / shape[-1]))
        self.k = np.meshgrid(*ks, indexing="ij", sparse=True)
        # first-derivative symbols; the Nyquist mode has no odd derivative
        self.ik = []
        for j, n in enumerate(shape):
            kj = self.k[j].copy()
            kj[np.abs(kj) == n // 2] = 0.0
            self.ik.append(1j * kj)
        self.k2 = sum(kj**2 for kj in self.k)
        keep = np.ones(np.broadcast_shapes(*(kj.shape for kj in self.k)), dtype=bool)
        for j, n in enumerate(shape):
            keep = keep & (np.abs(self.k[j]) <= (n - 1) // 3)
        self.keep = keep
        inv = np.zeros_like(self.k2)
        np.divide(1.0, self.k2, out=inv, where=self.k2 > 0)
        self.inv_k2 = inv

    @property
    def coords(self):
        axes = [np.arange(n) * (2 * np.pi / n) for n in self.shape]
        return np.meshgrid(*axes, indexing="ij")

    def fft(self, a):
        return np.fft.rfftn(a, axes=tuple(range(-self.dim, 0)))

    def ifft(self, a_hat):
        # irfftn assumes Hermitian input, so the output is real by construction
        return np.fft.irfftn(a_hat, s=self.shape, axes=tuple(range(-self.dim, 0)))

    def dealias(self, a):
        return self.ifft(self.fft(a) * self.keep)

    def lowpass(self, a, kmax):
        mask = np.ones_like(self.keep)
        for kj in self.k:
            mask = mask & (np.abs(kj) <= kmax)
        return self.ifft(self.fft(a) * mask)

    def diff(self, a, j, order=1):
        """d^order/dx_j^order of a real array (component axes leading)."""
        if order == 0:
            return np.array(a, dtype=float)
        sym = self.ik[j] ** order if order % 2 else (-(self.k[j] ** 2)) ** (order // 2)
        return self.ifft(self.fft(a) * sym)

    def laplacian(self, a):
        return self.ifft(-self.k2 * self.fft(a))

    def __eq__(self, other):
        return isinstance(other, PeriodicGrid) and self.shape == other.shape

    def __hash__(self):
        return hash(self.shape)

    def __repr__(self):
        return f"PeriodicGrid({self.shape})"


@dataclass(frozen=True, eq=False)
class Field:
    """``c`` real components sampled on ``grid``; data shape (c, *grid.shape)."""

    grid: PeriodicGrid
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.shape == self.grid.shape:
            data = data[None]
        if data.shape[1:] != self.grid.shape:
            raise ValueError(f"field shape {data.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("field contains non-finite values")
        object.__setattr__(self, "data", data)

    @property
    def ncomp(self):
        return self.data.shape[0]

    def __getitem__(self, i):
        return self.data[i]

    def max_norm(self):
        return float(np.max(np.abs(self.data))) if self.data.size else 0.0

    def l2_norm(self):
        return float(np.sqrt(np.mean(np.sum(self.data**2, axis=0))))

    def energy(self):
        return 0.5 * float(np.mean(np.sum(self.data**2, axis=0)))

    def __add__(self, other):
        return Field(self.grid, self.data + other.data)

    def __sub__(self, other):
        return Field(self.grid, self.data - other.data)

    def __mul__(self, c):
        return Field(self.grid, self.data * float(c))

    __rmul__ = __mul__


# -- I/O -------------------------------------------------------------------------------

_MAGIC = b"CFLD"
_VERSION = 1


def write_field(path, field):
    """Flat binary: magic, version, ncomp, ndim, dims (uint32 LE), then float64 LE."""
    header = struct.pack("<4sIII", _MAGIC, _VERSION, field.ncomp, field.grid.dim)
    header += struct.pack(f"<{field.grid.dim}I", *field.grid.shape)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(field.data, dtype="<f8").tobytes())


def read_field(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    magic, version, ncomp, ndim = struct.unpack_from("<4sIII", raw, 0)
    if magic != _MAGIC or version != _VERSION:
        raise ValueError(f"{path}: not a field file")
    off = struct.calcsize("<4sIII")
    shape = struct.unpack_from(f"<{ndim}I", raw, off)
    off += 4 * ndim
    data = np.frombuffer(raw, dtype="<f8", offset=off).reshape((ncomp, *shape))
    return Field(PeriodicGrid(shape), data.astype(float))


def write_field_csv(path, field):
    """One row per grid point: coordinates then components, repr-exact floats."""
    grid = field.grid
    names = ["x"] if grid.dim == 1 else [f"x{j + 1}" for j in range(grid.dim)]
    cols = [c.ravel() for c in grid.coords] + [comp.ravel() for comp in field.data]
    lines = [",".join(names + [f"c{i}" for i in range(field.ncomp)])]
    for row in zip(*cols):
        lines.append(",".join(repr(float(v)) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
