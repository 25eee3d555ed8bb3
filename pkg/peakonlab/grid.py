"""
Spatial discretization for peakonlab.
A periodic uniform grid stands in for the real line; Fields are immutable samples on it.
"""
import math
import numbers
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Callable, Optional, Union

import numpy as np

from .errors import ConfigurationError, FieldError, SamplingError

MIN_NODES = 16


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Origin-centered periodic grid, x_j = -length/2 + j*length/n."""

    length: float
    n: int

    def __post_init__(self):
        if not (isinstance(self.length, numbers.Real) and math.isfinite(self.length) and self.length > 0):
            raise ConfigurationError(f"Grid length must be positive, got {self.length!r}")
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)):
            raise ConfigurationError(f"Grid node count must be an integer, got {self.n!r}")
        if self.n < MIN_NODES or not _is_power_of_two(int(self.n)):
            raise ConfigurationError(f"Grid node count must be a power of two >= {MIN_NODES}, got {self.n}")
        object.__setattr__(self, "length", float(self.length))
        object.__setattr__(self, "n", int(self.n))

    @property
    def h(self) -> float:
        return self.length / self.n

    @cached_property
    def nodes(self) -> np.ndarray:
        x = -0.5 * self.length + np.arange(self.n) * self.h
        x.flags.writeable = False
        return x

    @property
    def origin_index(self) -> int:
        return self.n // 2


def make_grid(length: float, n: int) -> Grid:
    """Build a Grid, raising ConfigurationError on a bad length or node count."""
    return Grid(length=length, n=n)


@dataclass(frozen=True, eq=False)
class Field:
    """Real values sampled on a Grid. The values array is read-only."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        if arr.shape != (self.grid.n,):
            raise FieldError(f"Field needs {self.grid.n} values, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            bad = int(np.flatnonzero(~np.isfinite(arr))[0])
            raise FieldError(f"Field has a non-finite value at node {bad}")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @classmethod
    def zeros(cls, grid: Grid) -> "Field":
        return cls(grid, np.zeros(grid.n))

    def with_values(self, values: np.ndarray) -> "Field":
        return Field(self.grid, values)

    def _check_same_grid(self, other: "Field"):
        if other.grid != self.grid:
            raise FieldError("Fields live on different grids")

    def __add__(self, other: "Field") -> "Field":
        self._check_same_grid(other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        self._check_same_grid(other)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, alpha: float) -> "Field":
        return Field(self.grid, alpha * self.values)

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.values)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


def sample(f: Callable[[np.ndarray], Union[np.ndarray, float]], grid: Grid) -> Field:
    """Evaluate f at every grid node. f receives the whole node array."""
    with np.errstate(all="ignore"):
        raw = np.asarray(f(grid.nodes), dtype=float)
    values = np.broadcast_to(raw, (grid.n,)).copy()
    finite = np.isfinite(values)
    if not finite.all():
        bad = int(np.flatnonzero(~finite)[0])
        raise SamplingError(f"Sampled function is not finite at x = {grid.nodes[bad]!r} (node {bad})")
    return Field(grid, values)


def integrate(f: Field) -> float:
    """Periodic rectangle rule h * sum(values)."""
    return float(f.grid.h * np.sum(f.values))


@dataclass(frozen=True)
class Window:
    """Open interval (lo, hi); infinite endpoints mean 'to the edge of the box'.

    A node lying exactly on an endpoint is excluded, so windows round inward.
    """

    lo: float = -math.inf
    hi: float = math.inf

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi) or not self.lo < self.hi:
            raise ConfigurationError(f"Window needs lo < hi, got ({self.lo}, {self.hi})")

    @classmethod
    def full(cls) -> "Window":
        return cls()

    @classmethod
    def symmetric(cls, half_width: float) -> "Window":
        return cls(-half_width, half_width)

    def mask(self, grid: Grid) -> np.ndarray:
        x = grid.nodes
        return (x > self.lo) & (x < self.hi)

    def clipped(self, grid: Grid) -> "Window":
        """Endpoints clipped to the box edges; used for reporting."""
        lo = max(self.lo, -0.5 * grid.length)
        hi = min(self.hi, 0.5 * grid.length)
        if lo >= hi:
            return self
        return Window(lo, hi)


@dataclass(frozen=True, eq=False)
class WindowedField:
    field: Field
    mask: np.ndarray
    count: int

    @property
    def empty(self) -> bool:
        return self.count == 0


def window_restrict(f: Field, w: Window) -> WindowedField:
    """Zero values outside the open window and report how many nodes remain."""
    mask = w.mask(f.grid)
    mask.flags.writeable = False
    count = int(np.count_nonzero(mask))
    return WindowedField(Field(f.grid, np.where(mask, f.values, 0.0)), mask, count)


class NormKind(str, Enum):
    LP = "Lp"
    H1 = "H1"
    W1P = "W1p"


@dataclass(frozen=True)
class Norm:
    kind: NormKind = NormKind.LP
    p: float = 2.0

    def __post_init__(self):
        p = float(self.p)
        if math.isnan(p) or p < 1:
            raise ConfigurationError(f"Norm exponent p must satisfy 1 <= p <= inf, got {self.p}")
        if self.kind == NormKind.H1:
            p = 2.0
        object.__setattr__(self, "p", p)

    @classmethod
    def lp(cls, p: float) -> "Norm":
        return cls(NormKind.LP, p)

    @classmethod
    def h1(cls) -> "Norm":
        return cls(NormKind.H1, 2.0)

    @classmethod
    def w1p(cls, p: float) -> "Norm":
        return cls(NormKind.W1P, p)


def _lp(values: np.ndarray, h: float, p: float) -> float:
    if values.size == 0:
        return 0.0
    a = np.abs(values)
    if math.isinf(p):
        return float(np.max(a))
    if p == 1.0:
        return float(h * np.sum(a))
    if p == 2.0:
        return float(math.sqrt(h * np.sum(a * a)))
    return float((h * np.sum(a ** p)) ** (1.0 / p))


def norm(f: Field, kind: Norm, window: Optional[Window] = None) -> float:
    """Quadrature norm of f, optionally restricted to a window.

    Derivatives for H1 and W1p are taken spectrally on the whole field before
    restriction, so a full-domain window reproduces the unwindowed norm exactly.
    """
    mask = window.mask(f.grid) if window is not None else np.ones(f.grid.n, dtype=bool)
    h = f.grid.h
    base = _lp(f.values[mask], h, kind.p)
    if kind.kind == NormKind.LP:
        return base
    from .helmholtz import workspace_for

    fx = workspace_for(f.grid).deriv(f, 1).values[mask]
    slope = _lp(fx, h, kind.p)
    if math.isinf(kind.p):
        return max(base, slope)
    if kind.p == 2.0:
        return math.hypot(base, slope)
    return float((base ** kind.p + slope ** kind.p) ** (1.0 / kind.p))


def boundary_fraction(f: Field) -> float:
    """Largest boundary-cell magnitude relative to the field maximum (0 for zero data)."""
    peak = f.max_abs()
    if peak == 0.0:
        return 0.0
    return float(max(abs(f.values[0]), abs(f.values[-1])) / peak)
