"""
Conserved quantities, weights, scale functions, windows and virial functionals.

Virial functionals are evaluated on the functional clock t = t_phys + t_offset, where
every logarithm is at least 1. The exterior functional is the exception: it uses
physical time since its weight contains no logarithm.

Time derivatives are supplied in closed form from the flux forms of the equation,

    u_t = -F_x,   F = u^2/2 + G(b/2 u^2 + (3-b)/2 u_x^2)
    m_t = -Q_x,   Q = u m + (b-1)(u^2 - u_x^2)/2

so that after one integration by parts every derivative is a single quadrature.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationInfo, field_validator, model_validator
from scipy.integrate import cumulative_trapezoid as _running_trapezoid

from .dynamics import State, flux, flux_parts, momentum_flux
from .errors import DomainError, InsufficientDataError
from .grid import Norm, Window, integrate, norm

logger = logging.getLogger(__name__)

E = math.e


class ScaleParams(BaseModel):
    """Exponents of the growing window: lambda_c = t^c / log t, M_q uses x / lambda^q."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    q: float = 2.0
    c: float = 0.5
    t_offset: float = 10.0

    @field_validator("q")
    @classmethod
    def _check_q(cls, v: float) -> float:
        if not (math.isfinite(v) and v > 1):
            raise ValueError("q must exceed 1")
        return v

    @field_validator("c")
    @classmethod
    def _check_c(cls, v: float, info: ValidationInfo) -> float:
        if not (math.isfinite(v) and 0 <= v < 1):
            raise ValueError("c must lie in [0, 1)")
        q = info.data.get("q")
        if q is not None and v > 2.0 / (2.0 + q):
            raise ValueError("c ≤ 2/(2+q) required")
        return v

    @field_validator("t_offset")
    @classmethod
    def _check_offset(cls, v: float) -> float:
        if not (math.isfinite(v) and v >= E):
            raise ValueError("t_offset must be at least e")
        return v

    def clock(self, t_phys: float) -> float:
        return t_phys + self.t_offset


class ExteriorFrame(BaseModel):
    """Frame moving at speed sigma with a tanh front of width L."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    sigma: float
    width: float
    t0: float = 3.0

    @field_validator("sigma")
    @classmethod
    def _check_sigma(cls, v: float) -> float:
        if not (math.isfinite(v) and v > 0):
            raise ValueError("sigma must be positive")
        return v

    @field_validator("t0")
    @classmethod
    def _check_t0(cls, v: float) -> float:
        if not (math.isfinite(v) and v > 2):
            raise ValueError("t0 must exceed 2")
        return v

    @model_validator(mode="after")
    def _check_width(self):
        if not (math.isfinite(self.width) and self.width >= 10 * self.sigma):
            raise ValueError("L ≥ 10·sigma required")
        return self


@dataclass(frozen=True)
class FunctionalValue:
    name: str
    t: float
    value: float
    derivative_analytic: Optional[float] = None
    derivative_fd: Optional[float] = None
    extras: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for v in (self.value, self.derivative_analytic, self.derivative_fd):
            if v is not None and not math.isfinite(v):
                raise DomainError(f"Functional {self.name} produced a non-finite value at t={self.t}")


# ---------------------------------------------------------------- scale functions

def _check_clock(t: float):
    if not (math.isfinite(t) and t >= E):
        raise DomainError(f"Functional clock t = {t} is below e; raise t_offset")


def scale_lambda(t: float, c: float) -> float:
    """t^c / log t, and 1 when c = 0."""
    if c == 0:
        return 1.0
    _check_clock(t)
    return t ** c / math.log(t)


def scale_mu(t: float, c: float) -> float:
    """t^(1-c) log^2 t."""
    _check_clock(t)
    return t ** (1.0 - c) * math.log(t) ** 2


def dlog_lambda(t: float, c: float) -> float:
    """lambda'/lambda = (c - 1/log t) / t."""
    if c == 0:
        return 0.0
    _check_clock(t)
    return (c - 1.0 / math.log(t)) / t


def dlog_mu(t: float, c: float) -> float:
    """mu'/mu = (1-c)/t + 2/(t log t)."""
    _check_clock(t)
    return (1.0 - c) / t + 2.0 / (t * math.log(t))


# ---------------------------------------------------------------- weights

class WeightKind(str, Enum):
    PHI_EXP = "PhiExp"
    TANH = "Tanh"
    SHIFTED_TANH = "ShiftedTanh"
    SECH2 = "Sech2"


def _sech(x: np.ndarray) -> np.ndarray:
    e = np.exp(-np.abs(x))
    return 2.0 * e / (1.0 + e * e)


def weight(kind: WeightKind, x, order: int = 0) -> np.ndarray:
    """Weight function or its first/second derivative, evaluated pointwise."""
    x = np.asarray(x, dtype=float)
    kind = WeightKind(kind)
    if order not in (0, 1, 2):
        raise ValueError(f"weight derivative order must be 0, 1 or 2, got {order}")
    if kind == WeightKind.PHI_EXP:
        e = np.exp(-np.abs(x))
        return (np.sign(x) * (1.0 - e), e, -np.sign(x) * e)[order]
    s2 = _sech(x) ** 2
    th = np.tanh(x)
    if kind == WeightKind.TANH:
        return (th, s2, -2.0 * s2 * th)[order]
    if kind == WeightKind.SHIFTED_TANH:
        return (0.5 * (th + 1.0), 0.5 * s2, -s2 * th)[order]
    return (s2, -2.0 * s2 * th, 4.0 * s2 * th * th - 2.0 * s2 * s2)[order]


def weight_ratio_constants(kind: WeightKind, half_range: float = 20.0, step: float = 1e-3) -> Dict[str, float]:
    """sup |w|, sup |w'|, sup |w'|/w and sup |w''|/w on a uniform grid."""
    x = np.arange(-half_range, half_range + 0.5 * step, step)
    w0, w1, w2 = (weight(kind, x, k) for k in (0, 1, 2))
    out = {"sup_w": float(np.max(np.abs(w0))), "sup_dw": float(np.max(np.abs(w1)))}
    positive = w0 > 0
    if positive.any():
        out["ratio_dw"] = float(np.max(np.abs(w1[positive]) / w0[positive]))
        out["ratio_d2w"] = float(np.max(np.abs(w2[positive]) / w0[positive]))
    return out


def product_kernel_rate(lam: float, q: float) -> float:
    """Decay rate of phi'(x/lam) phi'(x/lam^q) = exp(-|x| (lam^(q-1) + 1)/lam^q)."""
    return (lam ** (q - 1.0) + 1.0) / lam ** q


# ---------------------------------------------------------------- conserved quantities

class Conserved(str, Enum):
    IU = "Iu"
    ENERGY = "Energy"
    HM = "Hm"


def conserved(state: State, which: Conserved) -> float:
    """Quadrature of u, u^2 + u_x^2 or m. The energy is only conserved for b = 2."""
    which = Conserved(which)
    if which == Conserved.IU:
        return integrate(state.u)
    if which == Conserved.HM:
        return integrate(state.m)
    u, ux = state.u.values, state.ux.values
    return float(state.grid.h * np.sum(u * u + ux * ux))


def is_conserved(which: Conserved, b: float) -> bool:
    return Conserved(which) != Conserved.ENERGY or b == 2.0


# ---------------------------------------------------------------- virial functionals

def _quad(state: State, values: np.ndarray) -> float:
    return float(state.grid.h * np.sum(values))


@dataclass(frozen=True)
class MqBreakdown:
    """Signed pieces of dM_q/dt = -M1 - M2 - M3 + M4 + M5; only M4 and M5 carry G."""

    m1: float
    m2: float
    m3: float
    m4: float
    m5: float
    single: float

    NONLOCAL_TERMS = ("m4", "m5")

    @property
    def total(self) -> float:
        return -self.m1 - self.m2 - self.m3 + self.m4 + self.m5

    def as_dict(self) -> Dict[str, float]:
        return {"M1": self.m1, "M2": self.m2, "M3": self.m3, "M4": self.m4, "M5": self.m5,
                "total": self.total, "single": self.single}


def _mq_weights(state: State, t: float, sp: ScaleParams):
    lam = scale_lambda(t, sp.c)
    x = state.grid.nodes
    y, z = x / lam, x / lam ** sp.q
    phi = weight(WeightKind.PHI_EXP, y)
    dphi_y = weight(WeightKind.PHI_EXP, y, 1)
    dphi_z = weight(WeightKind.PHI_EXP, z, 1)
    d2phi_z = weight(WeightKind.PHI_EXP, z, 2)
    return lam, y, z, phi, dphi_y, dphi_z, d2phi_z


def functional_Mq(state: State, t: float, sp: ScaleParams) -> FunctionalValue:
    """(1/mu) int phi(x/lambda) phi'(x/lambda^q) u dx with the exponential weight."""
    lam, _, _, phi, _, dphi_z, _ = _mq_weights(state, t, sp)
    mu = scale_mu(t, sp.c)
    value = _quad(state, phi * dphi_z * state.u.values) / mu
    breakdown = mq_rhs_analytic(state, t, sp)
    return FunctionalValue("Mq", t, value, breakdown.total, extras=breakdown.as_dict())


def mq_rhs_analytic(state: State, t: float, sp: ScaleParams) -> MqBreakdown:
    lam, y, z, phi, dphi_y, dphi_z, d2phi_z = _mq_weights(state, t, sp)
    mu = scale_mu(t, sp.c)
    rl, rm = dlog_lambda(t, sp.c), dlog_mu(t, sp.c)
    u = state.u.values
    f = flux(state.u, state.params).values
    lam_q = lam ** sp.q
    value = _quad(state, phi * dphi_z * u) / mu
    m1 = rm * value
    m2 = rl / mu * _quad(state, y * dphi_y * dphi_z * u)
    m3 = sp.q * rl / mu * _quad(state, z * phi * d2phi_z * u)
    m4 = _quad(state, dphi_y * dphi_z * f) / (mu * lam)
    m5 = _quad(state, phi * d2phi_z * f) / (mu * lam_q)
    # one quadrature of (w_t - (mu'/mu) w) u + w_x F
    w = phi * dphi_z
    w_t = -rl * (y * dphi_y * dphi_z + sp.q * z * phi * d2phi_z)
    w_x = dphi_y * dphi_z / lam + phi * d2phi_z / lam_q
    single = _quad(state, (w_t - rm * w) * u + w_x * f) / mu
    return MqBreakdown(m1, m2, m3, m4, m5, single)


def mq_bound(state: State, t: float, sp: ScaleParams) -> float:
    """lambda^(q/2)/mu * |phi|_inf |phi'|_2 |u|_2, with |phi|_inf = |phi'|_2 = 1."""
    lam = scale_lambda(t, sp.c)
    return lam ** (0.5 * sp.q) / scale_mu(t, sp.c) * norm(state.u, Norm.lp(2))


def functional_I_tanh(state: State, t: float, sp: ScaleParams) -> FunctionalValue:
    """int tanh(x/lambda) u dx and its derivative split into drift, local and nonlocal parts."""
    lam = scale_lambda(t, sp.c)
    y = state.grid.nodes / lam
    u = state.u.values
    local, nonlocal_ = flux_parts(state.u, state.params)
    dphi = weight(WeightKind.TANH, y, 1)
    value = _quad(state, weight(WeightKind.TANH, y) * u)
    drift = -dlog_lambda(t, sp.c) * _quad(state, y * dphi * u)
    local_term = _quad(state, dphi * local.values) / lam
    nonlocal_term = _quad(state, dphi * nonlocal_.values) / lam
    extras = {"drift": drift, "local": local_term, "nonlocal": nonlocal_term,
              "local_energy": local_energy_density(state, t, sp)}
    return FunctionalValue("ITanh", t, value, drift + local_term + nonlocal_term, extras=extras)


def local_energy_density(state: State, t: float, sp: ScaleParams) -> float:
    """(1/lambda) int sech^2(x/lambda)(u^2 + u_x^2) dx, the integrand of the time-integrated decay estimate."""
    lam = scale_lambda(t, sp.c)
    w = weight(WeightKind.SECH2, state.grid.nodes / lam)
    u, ux = state.u.values, state.ux.values
    return _quad(state, w * (u * u + ux * ux)) / lam


def local_virial_density(state: State, t: float, sp: ScaleParams) -> float:
    """(1/(t log t)) int phi'(x/lambda) phi'(x/lambda^q)(u^2 + u_x^2) dx with the exponential weight.

    Its time integral is the quantity the M_q virial estimate keeps bounded.
    """
    _check_clock(t)
    lam = scale_lambda(t, sp.c)
    x = state.grid.nodes
    w = weight(WeightKind.PHI_EXP, x / lam, 1) * weight(WeightKind.PHI_EXP, x / lam ** sp.q, 1)
    u, ux = state.u.values, state.ux.values
    return _quad(state, w * (u * u + ux * ux)) / (t * math.log(t))


def functional_E_psi(state: State, t: float, sp: ScaleParams) -> FunctionalValue:
    """int sech^2(x/lambda) m dx.

    extras carries the split int psi u - (1/lambda^2) int psi'' u and the
    control quantity (1/lambda) int psi (u^2 + u_x^2).
    """
    lam = scale_lambda(t, sp.c)
    y = state.grid.nodes / lam
    psi = weight(WeightKind.SECH2, y)
    dpsi = weight(WeightKind.SECH2, y, 1)
    d2psi = weight(WeightKind.SECH2, y, 2)
    u, m = state.u.values, state.m.values
    value = _quad(state, psi * m)
    q = momentum_flux(state.m, state.params).values
    derivative = -dlog_lambda(t, sp.c) * _quad(state, y * dpsi * m) + _quad(state, dpsi * q) / lam
    extras = {
        "u_part": _quad(state, psi * u),
        "curvature_part": _quad(state, d2psi * u) / lam ** 2,
        "control": local_energy_density(state, t, sp),
    }
    return FunctionalValue("Epsi", t, value, derivative, extras=extras)


@dataclass(frozen=True)
class Sandwich:
    min_weight: float
    energy: float
    windowed_l1_m: float
    upper_bound: float
    empty: bool


def window_sandwich(state: State, t: float, sp: ScaleParams) -> Sandwich:
    """For m >= 0: |m|_{L1(window)} <= E(t) / min_window psi, with min psi = sech^2(1)."""
    lam = scale_lambda(t, sp.c)
    mask = Window.symmetric(lam).mask(state.grid)
    energy = functional_E_psi(state, t, sp).value
    if not mask.any():
        return Sandwich(1.0, energy, 0.0, math.inf, True)
    psi = weight(WeightKind.SECH2, state.grid.nodes[mask] / lam)
    min_weight = float(np.min(psi))
    l1 = float(state.grid.h * np.sum(np.abs(state.m.values[mask])))
    return Sandwich(min_weight, energy, l1, energy / min_weight, False)


def _exterior_argument(x: np.ndarray, t: float, frame: ExteriorFrame, shifted: bool, side: str):
    if side not in ("right", "left"):
        raise ValueError(f"side must be 'right' or 'left', got {side!r}")
    s = 1.0 if side == "right" else -1.0
    # the shifted frame runs at half speed: sigma*t0 - sigma/2 (t0 - t) = sigma (t0 + t)/2
    travel, rate = ((frame.t0 + t) / 2.0, 0.5) if shifted else (t, 1.0)
    arg = (s * x - frame.sigma * travel) / frame.width
    return arg, -frame.sigma * rate / frame.width, s / frame.width


def functional_exterior(state: State, t: float, frame: ExteriorFrame, shifted: bool = False,
                        side: str = "right") -> FunctionalValue:
    """int phi((x - sigma t)/L) m dx with phi = (tanh + 1)/2, at physical time t.

    side='left' mirrors the weight onto (-inf, -sigma t) for nonpositive momentum.
    """
    arg, arg_t, arg_x = _exterior_argument(state.grid.nodes, t, frame, shifted, side)
    m = state.m.values
    phi = weight(WeightKind.SHIFTED_TANH, arg)
    dphi = weight(WeightKind.SHIFTED_TANH, arg, 1)
    value = _quad(state, phi * m)
    q = momentum_flux(state.m, state.params).values
    derivative = arg_t * _quad(state, dphi * m) + arg_x * _quad(state, dphi * q)
    u, ux = state.u.values, state.ux.values
    extras = {"dissipation": -frame.sigma / frame.width * _quad(state, dphi * (u * u + ux * ux))}
    name = "ExteriorShifted" if shifted else "Exterior"
    return FunctionalValue(name, t, value, derivative, extras=extras)


def exterior_norm(state: State, t: float, frame: ExteriorFrame, p: float = 2.0, side: str = "right") -> float:
    """|u|_{W^{1,p}} on (sigma t, inf), or on (-inf, -sigma t) for side='left'."""
    edge = frame.sigma * t
    window = Window(edge, math.inf) if side == "right" else Window(-math.inf, -edge)
    return norm(state.u, Norm.w1p(p), window)


@dataclass(frozen=True)
class WindowNorms:
    t: float
    half_width: float
    h1_u: float
    l1_u: float
    l1_m: float
    empty: bool

    def as_dict(self) -> Dict[str, float]:
        return {"h1_u": self.h1_u, "l1_u": self.l1_u, "l1_m": self.l1_m, "window": self.half_width}


def window_norms(state: State, t: float, sp: ScaleParams) -> WindowNorms:
    """H1 of u, L1 of u and L1 of m on (-lambda_c(t), lambda_c(t))."""
    lam = scale_lambda(t, sp.c)
    window = Window.symmetric(lam)
    if not window.mask(state.grid).any():
        logger.warning("Window (-%.3g, %.3g) holds no grid nodes at t=%.6g", lam, lam, t)
        return WindowNorms(t, lam, 0.0, 0.0, 0.0, True)
    return WindowNorms(
        t, lam,
        norm(state.u, Norm.h1(), window),
        norm(state.u, Norm.lp(1), window),
        norm(state.m, Norm.lp(1), window),
        False,
    )


@dataclass(frozen=True)
class GrowthFit:
    exponent: float
    residual: float
    samples: int


def growth_exponent(times: Sequence[float], values: Sequence[float]) -> GrowthFit:
    """Least-squares slope of log |u|_1 against log <t>, <t> = sqrt(1 + t^2)."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.shape != v.shape or t.size < 10:
        raise InsufficientDataError(f"Growth fit needs at least 10 paired samples, got {t.size}")
    bracket = np.sqrt(1.0 + t * t)
    if bracket.max() / bracket.min() < 10.0:
        raise InsufficientDataError(
            f"Growth fit needs <t> to span a decade, got {bracket.min():.3g} .. {bracket.max():.3g}"
        )
    if not np.all(v > 0):
        raise InsufficientDataError("Growth fit needs strictly positive norms")
    lx, ly = np.log(bracket), np.log(v)
    (slope, intercept), res, *_ = np.polyfit(lx, ly, 1, full=True)
    residual = float(math.sqrt(res[0] / t.size)) if len(res) else 0.0
    return GrowthFit(float(slope), residual, int(t.size))


def cumulative_trapezoid(times: Sequence[float], values: Sequence[float]) -> np.ndarray:
    """Running time integral of a sampled series, starting at 0."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.size < 2:
        return np.zeros(t.size)
    return _running_trapezoid(v, t, initial=0.0)


# ---------------------------------------------------------------- observers

def diagnostics_observer(state: State) -> Dict[str, float]:
    """Conserved quantities and pointwise extremes sampled on every run."""
    u, m = state.u, state.m
    return {
        "Iu": conserved(state, Conserved.IU),
        "Energy": conserved(state, Conserved.ENERGY),
        "Hm": conserved(state, Conserved.HM),
        "min_m": float(np.min(m.values)),
        "min_u": float(np.min(u.values)),
        "max_u": u.max_abs(),
        "max_slope": state.ux.max_abs(),
        "l1_u": norm(u, Norm.lp(1)),
    }


def mq_observer(sp: ScaleParams):
    def observe(state: State) -> Dict[str, float]:
        t = sp.clock(state.t)
        fv = functional_Mq(state, t, sp)
        return {"Mq": fv.value, "Mq:dt": fv.derivative_analytic, "Mq:single": fv.extras["single"],
                "Mq:bound": mq_bound(state, t, sp), "Mq:local": local_virial_density(state, t, sp)}
    return observe


def itanh_observer(sp: ScaleParams):
    def observe(state: State) -> Dict[str, float]:
        fv = functional_I_tanh(state, sp.clock(state.t), sp)
        return {"ITanh": fv.value, "ITanh:dt": fv.derivative_analytic,
                "ITanh:local_energy": fv.extras["local_energy"]}
    return observe


def epsi_observer(sp: ScaleParams):
    def observe(state: State) -> Dict[str, float]:
        fv = functional_E_psi(state, sp.clock(state.t), sp)
        return {"Epsi": fv.value, "Epsi:dt": fv.derivative_analytic, "Epsi:control": fv.extras["control"]}
    return observe


def exterior_observer(frame: ExteriorFrame, shifted: bool = False, side: str = "right", p: float = 2.0):
    key = "ExteriorShifted" if shifted else "Exterior"

    def observe(state: State) -> Dict[str, float]:
        fv = functional_exterior(state, state.t, frame, shifted, side)
        return {key: fv.value, f"{key}:dt": fv.derivative_analytic,
                f"{key}:norm": exterior_norm(state, state.t, frame, p, side)}
    return observe


def window_observer(sp: ScaleParams):
    def observe(state: State) -> Dict[str, float]:
        t = sp.clock(state.t)
        out = {f"window:{k}": v for k, v in window_norms(state, t, sp).as_dict().items()}
        out["window:energy_bound"] = window_sandwich(state, t, sp).upper_bound
        return out
    return observe
