"""
Initial data generators: peakon trains, DP shock peakons, momentum-built data,
and the sign-pattern indicator for wave breaking.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigurationError
from .grid import Field, Grid, sample
from .helmholtz import green_apply, workspace_for

logger = logging.getLogger(__name__)

CLEARANCE_WIDTHS = 10.0
SIGN_THRESHOLD = 1e-12


@dataclass(frozen=True)
class PeakonSpec:
    """Train of peakons c_i e^{-|x - x_i|}; width > 0 smooths each kink with a unit-mass Gaussian."""

    amplitudes: Tuple[float, ...]
    centers: Tuple[float, ...]
    width: float = 0.0

    def __post_init__(self):
        amplitudes = tuple(float(c) for c in self.amplitudes)
        centers = tuple(float(x) for x in self.centers)
        if not amplitudes:
            raise ConfigurationError("Peakon train needs at least one amplitude")
        if len(amplitudes) != len(centers):
            raise ConfigurationError(
                f"Peakon train has {len(amplitudes)} amplitudes but {len(centers)} centers"
            )
        if not all(math.isfinite(v) for v in amplitudes + centers):
            raise ConfigurationError("Peakon amplitudes and centers must be finite")
        if not (math.isfinite(self.width) and self.width >= 0):
            raise ConfigurationError(f"Mollification width must be >= 0, got {self.width}")
        object.__setattr__(self, "amplitudes", amplitudes)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "width", float(self.width))

    def check_clearance(self, grid: Grid):
        half = 0.5 * grid.length
        margin = CLEARANCE_WIDTHS * self.width
        for x in self.centers:
            if not -half + margin < x < half - margin:
                raise ConfigurationError(
                    f"Peakon center {x} needs clearance {margin} from the box edge at +-{half}"
                )


@dataclass(frozen=True)
class ShockPeakonSpec:
    """DP shock peakon sgn(x) e^{-|x|} / (t + k)."""

    k: float = 1.0
    t: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.k) and self.k > 0):
            raise ConfigurationError(f"Shock peakon needs k > 0, got {self.k}")
        if not (math.isfinite(self.t) and self.t >= 0):
            raise ConfigurationError(f"Shock peakon evaluation time must be >= 0, got {self.t}")


def _spectral_peakon(grid: Grid, amplitude: float, center: float, width: float) -> np.ndarray:
    """Periodic peakon G(2c delta) convolved with a Gaussian, built mode by mode.

    Mode 0 equals 2c exactly, so the rectangle-rule mass is 2c to round-off.
    """
    ws = workspace_for(grid)
    shift = center - grid.nodes[0]
    coeff = 2.0 * amplitude * np.exp(-1j * ws.k * shift) * np.exp(-0.5 * (ws.k * width) ** 2) * ws.green
    # the unpaired Nyquist mode keeps only its real part
    coeff[grid.n // 2] = coeff[grid.n // 2].real
    return np.real(np.fft.ifft(coeff)) * grid.n / grid.length


def peakon_train(spec: PeakonSpec, grid: Grid) -> Field:
    spec.check_clearance(grid)
    if spec.width == 0.0:
        centers = np.asarray(spec.centers)
        amps = np.asarray(spec.amplitudes)
        return sample(lambda x: np.sum(amps[:, None] * np.exp(-np.abs(x[None, :] - centers[:, None])), axis=0), grid)
    values = np.zeros(grid.n)
    for c, x0 in zip(spec.amplitudes, spec.centers):
        values += _spectral_peakon(grid, c, x0, spec.width)
    return Field(grid, values)


def shock_peakon(spec: ShockPeakonSpec, grid: Grid) -> Field:
    scale = 1.0 / (spec.t + spec.k)
    return sample(lambda x: scale * np.sign(x) * np.exp(-np.abs(x)), grid)


def gaussian(grid: Grid, amplitude: float = 1.0, center: float = 0.0, width: float = 1.0) -> Field:
    """amplitude * exp(-(x - center)^2 / (2 width^2))."""
    if not width > 0:
        raise ConfigurationError(f"Gaussian width must be positive, got {width}")
    return sample(lambda x: amplitude * np.exp(-0.5 * ((x - center) / width) ** 2), grid)


def unit_mass_gaussian(grid: Grid, center: float = 0.0, width: float = 1.0) -> Field:
    return gaussian(grid, 1.0 / (width * math.sqrt(2.0 * math.pi)), center, width)


def gaussian_bumps(grid: Grid, amplitudes: Sequence[float], centers: Sequence[float], width: float) -> Field:
    """Sum of Gaussians; with mixed signs this builds McKean-pattern momentum."""
    if len(amplitudes) != len(centers):
        raise ConfigurationError("Gaussian bumps need as many centers as amplitudes")
    total = Field.zeros(grid)
    for a, x0 in zip(amplitudes, centers):
        total = total + gaussian(grid, a, x0, width)
    return total


def random_smooth(grid: Grid, rng: np.random.Generator, max_mode: int = 16,
                  decay: float = 1.0, nonnegative: bool = False) -> Field:
    """Random real field with modes |j| <= max_mode and amplitudes falling like j^-decay."""
    if not 1 <= max_mode < grid.n // 2:
        raise ConfigurationError(f"max_mode must lie in [1, n/2), got {max_mode}")
    coeff = np.zeros(grid.n, dtype=complex)
    modes = np.arange(1, max_mode + 1)
    amp = modes.astype(float) ** (-decay)
    coeff[modes] = amp * (rng.standard_normal(max_mode) + 1j * rng.standard_normal(max_mode))
    coeff[-modes] = np.conj(coeff[modes])
    coeff[0] = rng.standard_normal()
    values = np.real(np.fft.ifft(coeff)) * grid.n
    if nonnegative:
        values = values - values.min()
    return Field(grid, values)


def from_momentum(m0: Field) -> Field:
    """u0 = G m0."""
    return green_apply(m0)


def first_sign_change(m0: Field) -> Optional[Tuple[int, int]]:
    """Node pair (j, j') with j < j', m0[j] > 0 and m0[j'] < 0, or None."""
    cut = SIGN_THRESHOLD * m0.max_abs()
    pos = np.flatnonzero(m0.values > cut)
    neg = np.flatnonzero(m0.values < -cut)
    if pos.size == 0 or neg.size == 0 or pos[0] >= neg[-1]:
        return None
    return int(pos[0]), int(neg[-1])


def mckean_indicator(m0: Field) -> bool:
    """True when some positive momentum sits left of some negative momentum."""
    return first_sign_change(m0) is not None
