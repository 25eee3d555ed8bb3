"""
Nonlocal operators of the b-family on the periodic grid.

G = (1 - d^2/dx^2)^{-1} acts as convolution with e^{-|x|}/2 on the line and with the
cosh-form periodic Green's function on the circle. Every operator has a fast Fourier
multiplier path; G also has an O(n^2) quadrature oracle.
"""
import logging
from functools import lru_cache

import numpy as np

from .errors import OperatorError
from .grid import Field, Grid

logger = logging.getLogger(__name__)

DIRECT_MAX_NODES = 16384
_DIRECT_BLOCK = 256


class SpectralWorkspace:
    """Wavenumbers and cached multiplier tables for one grid. Read-only after construction."""

    def __init__(self, grid: Grid):
        self.grid = grid
        n = grid.n
        self.modes = np.fft.fftfreq(n, d=1.0 / n)
        self.k = 2.0 * np.pi * self.modes / grid.length
        ik = 1j * self.k
        # odd derivatives drop the unpaired Nyquist mode so real data stays real
        ik[n // 2] = 0.0
        k2 = self.k ** 2
        self.green = 1.0 / (1.0 + k2)
        self.green_dx = ik / (1.0 + k2)
        self.helmholtz = 1.0 + k2
        self.ik = ik
        self.minus_k2 = -k2
        self.keep = np.abs(self.modes) <= n // 3
        for table in (self.modes, self.k, self.green, self.green_dx, self.helmholtz,
                      self.ik, self.minus_k2, self.keep):
            table.flags.writeable = False

    def _check(self, f: Field):
        if f.grid != self.grid:
            raise OperatorError(f"Field grid {f.grid} does not match workspace grid {self.grid}")

    def apply(self, multiplier: np.ndarray, values: np.ndarray) -> np.ndarray:
        return np.real(np.fft.ifft(multiplier * np.fft.fft(values)))

    def dealias(self, values: np.ndarray) -> np.ndarray:
        """2/3-rule projection: zero every mode with |j| > n/3."""
        return self.apply(self.keep, values)

    def product(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Dealiased pointwise product of two already-projected arrays."""
        return self.dealias(a * b)

    def green_apply(self, f: Field) -> Field:
        self._check(f)
        return Field(self.grid, self.apply(self.green, f.values))

    def green_apply_dx(self, f: Field) -> Field:
        self._check(f)
        return Field(self.grid, self.apply(self.green_dx, f.values))

    def helmholtz_forward(self, u: Field) -> Field:
        self._check(u)
        return Field(self.grid, self.apply(self.helmholtz, u.values))

    def deriv(self, f: Field, order: int = 1) -> Field:
        self._check(f)
        if order == 1:
            return Field(self.grid, self.apply(self.ik, f.values))
        if order == 2:
            return Field(self.grid, self.apply(self.minus_k2, f.values))
        raise OperatorError(f"Spectral derivative order must be 1 or 2, got {order}")


@lru_cache(maxsize=32)
def workspace_for(grid: Grid) -> SpectralWorkspace:
    """Shared workspace per grid; safe to reuse across threads."""
    return SpectralWorkspace(grid)


def green_apply(f: Field) -> Field:
    """G f via the multiplier 1/(1+k^2); preserves the mean."""
    return workspace_for(f.grid).green_apply(f)


def green_apply_dx(f: Field) -> Field:
    """d/dx G f via the multiplier ik/(1+k^2); zero mean."""
    return workspace_for(f.grid).green_apply_dx(f)


def helmholtz_forward(u: Field) -> Field:
    """m = u - u_xx via the multiplier 1+k^2."""
    return workspace_for(u.grid).helmholtz_forward(u)


def deriv(f: Field, order: int = 1) -> Field:
    return workspace_for(f.grid).deriv(f, order)


def periodic_kernel(distance: np.ndarray, length: float) -> np.ndarray:
    """cosh(length/2 - |d|) / (2 sinh(length/2)) for |d| <= length/2, overflow-free."""
    d = np.abs(distance)
    return (np.exp(-d) + np.exp(-(length - d))) / (2.0 * (1.0 - np.exp(-length)))


def _fd_second(values: np.ndarray, h: float) -> np.ndarray:
    f = values
    return (-np.roll(f, -2) + 16 * np.roll(f, -1) - 30 * f + 16 * np.roll(f, 1) - np.roll(f, 2)) / (12 * h * h)


def green_apply_direct(f: Field) -> Field:
    """O(n^2) quadrature convolution with the periodic kernel.

    The kernel has a slope jump at zero distance, so the plain rectangle sum is
    corrected with the Euler-Maclaurin endpoint terms of that jump (through h^6),
    using finite-difference derivatives of f. For smooth f this agrees with the
    spectral path to roughly 1e-10.
    """
    grid = f.grid
    n, h, length = grid.n, grid.h, grid.length
    if n > DIRECT_MAX_NODES:
        raise OperatorError(f"Direct convolution refused for n = {n} > {DIRECT_MAX_NODES}")
    offsets = np.arange(n) * h
    wrapped = np.minimum(offsets, length - offsets)
    kernel = periodic_kernel(wrapped, length)
    values = f.values
    out = np.empty(n)
    cols = np.arange(n)
    for start in range(0, n, _DIRECT_BLOCK):
        rows = np.arange(start, min(start + _DIRECT_BLOCK, n))
        block = kernel[(rows[:, None] - cols[None, :]) % n]
        out[rows] = h * (block @ values)
    f2 = _fd_second(values, h)
    f4 = _fd_second(f2, h)
    out -= (h ** 2 / 12.0) * values
    out += (h ** 4 / 720.0) * (values + 3.0 * f2)
    out -= (h ** 6 / 30240.0) * (values + 10.0 * f2 + 5.0 * f4)
    return Field(grid, out)
