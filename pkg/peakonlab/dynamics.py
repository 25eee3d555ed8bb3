"""
Right-hand sides of the b-family in nonlocal u-form and momentum m-form.

    u-form:  u_t = -d/dx( u^2/2 + G( b/2 u^2 + (3-b)/2 u_x^2 ) )
    m-form:  m_t = -( u m_x + b m u_x ),   u = G m

b = 2 is Camassa-Holm, b = 3 is Degasperis-Procesi. Quadratic products use the
2/3-rule: factors are projected before multiplying and the product is projected again.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Tuple

import numpy as np

from .errors import ConfigurationError, DynamicsError
from .grid import Field, Grid
from .helmholtz import SpectralWorkspace, workspace_for

logger = logging.getLogger(__name__)

SIGN_THRESHOLD = 1e-12


class Form(str, Enum):
    U = "u"
    M = "m"


@dataclass(frozen=True)
class BFamilyParams:
    b: float = 2.0
    form: Form = Form.U

    def __post_init__(self):
        b = float(self.b)
        if not 0.0 < b <= 3.0:
            raise ConfigurationError(f"Family parameter b must lie in (0, 3], got {self.b}")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "form", Form(self.form))

    @property
    def is_camassa_holm(self) -> bool:
        return self.b == 2.0

    @property
    def is_degasperis_procesi(self) -> bool:
        return self.b == 3.0

    @property
    def is_integrable(self) -> bool:
        return self.is_camassa_holm or self.is_degasperis_procesi


def source_coefficients(b: float) -> Tuple[float, float]:
    """Coefficients of u^2 and u_x^2 inside G(...)."""
    return 0.5 * b, 0.5 * (3.0 - b)


def momentum_sign(m: Field) -> int:
    """+1 if m >= 0, -1 if m <= 0, 0 if signed both ways or zero (tiny values ignored)."""
    peak = m.max_abs()
    if peak == 0.0:
        return 0
    cut = SIGN_THRESHOLD * peak
    has_pos = bool(np.any(m.values > cut))
    has_neg = bool(np.any(m.values < -cut))
    if has_pos and not has_neg:
        return 1
    if has_neg and not has_pos:
        return -1
    return 0


@dataclass(frozen=True, eq=False)
class State:
    """Solution at time t. primary is u for the u-form and m for the m-form."""

    t: float
    primary: Field
    params: BFamilyParams
    initial_sign: int = 0

    def __post_init__(self):
        if not np.isfinite(self.t):
            raise DynamicsError(f"State time must be finite, got {self.t}")

    @property
    def grid(self) -> Grid:
        return self.primary.grid

    @property
    def workspace(self) -> SpectralWorkspace:
        return workspace_for(self.grid)

    @cached_property
    def u(self) -> Field:
        if self.params.form == Form.U:
            return self.primary
        return self.workspace.green_apply(self.primary)

    @cached_property
    def ux(self) -> Field:
        if self.params.form == Form.U:
            return self.workspace.deriv(self.primary, 1)
        return self.workspace.green_apply_dx(self.primary)

    @cached_property
    def m(self) -> Field:
        if self.params.form == Form.M:
            return self.primary
        return self.workspace.helmholtz_forward(self.primary)

    def advanced(self, t: float, primary: Field) -> "State":
        return State(t, primary, self.params, self.initial_sign)


def initial_state(initial: Field, params: BFamilyParams) -> State:
    """State at t = 0; records the sign of m0 for m-form runs."""
    sign = momentum_sign(initial) if params.form == Form.M else 0
    return State(0.0, initial, params, sign)


def _finite(grid: Grid, values: np.ndarray, where: str) -> Field:
    if not np.isfinite(values).all():
        raise DynamicsError(f"Non-finite values in {where}; likely wave breaking")
    return Field(grid, values)


def _flux_parts(ws: SpectralWorkspace, u: np.ndarray, ux: np.ndarray, b: float) -> Tuple[np.ndarray, np.ndarray]:
    a, c = source_coefficients(b)
    u2 = ws.product(u, u)
    ux2 = ws.product(ux, ux)
    return 0.5 * u2, ws.apply(ws.green, a * u2 + c * ux2)


def _flux_values(ws: SpectralWorkspace, u: np.ndarray, ux: np.ndarray, b: float) -> np.ndarray:
    local, nonlocal_ = _flux_parts(ws, u, ux, b)
    return local + nonlocal_


def flux_parts(u: Field, params: BFamilyParams) -> Tuple[Field, Field]:
    """The local part u^2/2 and the nonlocal part G(b/2 u^2 + (3-b)/2 u_x^2) of the flux."""
    ws = workspace_for(u.grid)
    uh = ws.dealias(u.values)
    with np.errstate(all="ignore"):
        local, nonlocal_ = _flux_parts(ws, uh, ws.apply(ws.ik, uh), params.b)
    return _finite(u.grid, local, "flux"), _finite(u.grid, nonlocal_, "flux")


def flux(u: Field, params: BFamilyParams) -> Field:
    """F = u^2/2 + G(b/2 u^2 + (3-b)/2 u_x^2), with u_t = -F_x."""
    local, nonlocal_ = flux_parts(u, params)
    return local + nonlocal_


def momentum_flux(m: Field, params: BFamilyParams) -> Field:
    """Q = u m + (b-1)(u^2 - u_x^2)/2, with m_t = -Q_x and the same dealiasing as rhs_m."""
    ws = workspace_for(m.grid)
    mh = ws.dealias(m.values)
    with np.errstate(all="ignore"):
        u = ws.apply(ws.green, mh)
        ux = ws.apply(ws.green_dx, mh)
        q = ws.product(u, mh) + 0.5 * (params.b - 1.0) * (ws.product(u, u) - ws.product(ux, ux))
    return _finite(m.grid, q, "momentum_flux")


def rhs_u(u: Field, params: BFamilyParams) -> Field:
    ws = workspace_for(u.grid)
    uh = ws.dealias(u.values)
    with np.errstate(all="ignore"):
        flux_values = _flux_values(ws, uh, ws.apply(ws.ik, uh), params.b)
        out = -ws.apply(ws.ik, flux_values)
    return _finite(u.grid, out, "rhs_u")


def rhs_m(m: Field, params: BFamilyParams) -> Field:
    ws = workspace_for(m.grid)
    mh = ws.dealias(m.values)
    with np.errstate(all="ignore"):
        u = ws.apply(ws.green, mh)
        ux = ws.apply(ws.green_dx, mh)
        mx = ws.apply(ws.ik, mh)
        out = -(ws.product(u, mx) + params.b * ws.product(mh, ux))
    return _finite(m.grid, out, "rhs_m")


def rhs_for(params: BFamilyParams):
    """Right-hand side matching the formulation, as a Field -> Field callable."""
    if params.form == Form.U:
        return lambda f: rhs_u(f, params)
    return lambda f: rhs_m(f, params)


@dataclass(frozen=True)
class ConsistencyReport:
    discrepancy: float
    scale: float
    tol: float
    passed: bool


def cross_check_forms(u: Field, params: BFamilyParams, tol: float = 1e-6) -> ConsistencyReport:
    """Compare (1 - d^2)(rhs_u(u)) with rhs_m((1 - d^2) u)."""
    ws = workspace_for(u.grid)
    m = ws.helmholtz_forward(u)
    lhs = ws.helmholtz_forward(rhs_u(u, params))
    rhs = rhs_m(m, params)
    discrepancy = float(np.max(np.abs(lhs.values - rhs.values)))
    scale = m.max_abs()
    passed = discrepancy <= tol * scale
    if not passed:
        logger.warning("Form cross-check failed for b=%s: discrepancy %.3e vs scale %.3e", params.b, discrepancy, scale)
    return ConsistencyReport(discrepancy, scale, tol, passed)
