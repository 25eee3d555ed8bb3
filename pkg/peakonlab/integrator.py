"""
Method-of-lines time stepping for the b-family.

Classical RK4 with a step size chosen once per observer-cadence block from the CFL
condition, observer sampling at block ends, and wave-breaking detection by slope
growth past a fixed multiple of the initial max|u_x|.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .dynamics import BFamilyParams, State, initial_state, rhs_for
from .errors import ConfigurationError, DynamicsError, FieldError, NumericalFailureError
from .grid import Field, Grid, boundary_fraction
from .helmholtz import workspace_for
from .initial_data import mckean_indicator

logger = logging.getLogger(__name__)

Observer = Callable[[State], Mapping[str, float]]
Rhs = Callable[[Field], Field]

DEFAULT_SAFETY = 0.3
BREAKING_SLOPE_FACTOR = 10.0
# a front of height 2 max|u| needs this many nodes across it to stay resolved
RESOLVED_FRONT_NODES = 4.0
LEAKAGE_LIMIT = 1e-8


class TerminationKind(str, Enum):
    COMPLETED = "Completed"
    WAVE_BREAKING = "WaveBreaking"
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclass(frozen=True)
class Termination:
    kind: TerminationKind
    t: float
    state: State
    reason: str = ""
    context: Dict[str, float] = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return {TerminationKind.COMPLETED: 0,
                TerminationKind.WAVE_BREAKING: 2,
                TerminationKind.NUMERICAL_FAILURE: 3}[self.kind]


@dataclass(frozen=True)
class SimConfig:
    params: BFamilyParams
    grid: Grid
    t_end: float
    dt: Optional[float] = None
    cfl_safety: float = DEFAULT_SAFETY
    cadence: float = 0.01
    breaking_threshold: Optional[float] = None
    snapshot_interval: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.t_end) and self.t_end > 0):
            raise ConfigurationError(f"t_end must be positive, got {self.t_end}")
        if self.dt is not None and not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigurationError(f"dt must be positive or auto, got {self.dt}")
        if not 0 < self.cfl_safety <= 1:
            raise ConfigurationError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if not 0 < self.cadence <= self.t_end:
            raise ConfigurationError(f"cadence must lie in (0, t_end], got {self.cadence}")
        if self.breaking_threshold is not None and not self.breaking_threshold > 0:
            raise ConfigurationError(f"breaking_threshold must be positive, got {self.breaking_threshold}")
        if not self.snapshot_interval > 0:
            raise ConfigurationError(f"snapshot_interval must be positive, got {self.snapshot_interval}")


@dataclass
class Trajectory:
    config: SimConfig
    snapshots: List[Tuple[float, State]]
    times: np.ndarray
    series: Dict[str, np.ndarray]
    termination: Termination
    initial: State

    @property
    def completed(self) -> bool:
        return self.termination.kind == TerminationKind.COMPLETED

    @property
    def final_state(self) -> State:
        return self.termination.state

    @property
    def cadence(self) -> float:
        return self.config.cadence

    def states(self) -> List[State]:
        return [s for _, s in self.snapshots]


def cfl_dt(state: State, grid: Grid, safety: float, cadence: float) -> float:
    """safety * h / max|u|, capped by the cadence; the cadence itself for u = 0."""
    peak = state.u.max_abs()
    if peak == 0.0:
        return cadence
    return min(safety * grid.h / peak, cadence)


def step_rk4(state: State, dt: float, rhs: Rhs) -> State:
    if not dt > 0:
        raise ConfigurationError(f"RK4 step needs dt > 0, got {dt}")
    f = state.primary
    try:
        k1 = rhs(f)
        k2 = rhs(f + (0.5 * dt) * k1)
        k3 = rhs(f + (0.5 * dt) * k2)
        k4 = rhs(f + dt * k3)
        new = f + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    except (DynamicsError, FieldError) as e:
        raise NumericalFailureError(f"RK4 stage failed at t = {state.t:.6g}: {e}") from e
    return state.advanced(state.t + dt, new)


def _max_slope(state: State) -> float:
    ws = workspace_for(state.grid)
    uh = np.fft.fft(state.u.values)
    return float(np.max(np.abs(np.real(np.fft.ifft(ws.ik * uh)))))


def resolvable_slope(state: State) -> float:
    """Steepest front 2 max|u| / (RESOLVED_FRONT_NODES h) the grid still resolves."""
    return 2.0 * state.u.max_abs() / (RESOLVED_FRONT_NODES * state.grid.h)


def _sample(observers: Sequence[Observer], state: State) -> Dict[str, float]:
    out: Dict[str, float] = {}
    for obs in observers:
        out.update({k: float(v) for k, v in obs(state).items()})
    return out


def run(config: SimConfig, initial: Field, observers: Sequence[Observer] = ()) -> Trajectory:
    """Evolve u0 (u-form) or m0 (m-form) to t_end or to a termination event."""
    if initial.grid != config.grid:
        raise ConfigurationError("Initial data lives on a different grid than the run config")
    rhs = rhs_for(config.params)
    # the right-hand sides only produce modes |j| <= n/3; anything above would stay frozen
    projected = Field(config.grid, workspace_for(config.grid).dealias(initial.values))
    removed = (projected - initial).max_abs()
    if removed > 0.0:
        logger.debug("Projected initial data onto |j| <= n/3 (max change %.3e)", removed)
    state = initial_state(projected, config.params)
    start = state
    slope0 = _max_slope(state)
    threshold = config.breaking_threshold
    if threshold is None:
        threshold = BREAKING_SLOPE_FACTOR * slope0 if slope0 > 0 else math.inf
    if not threshold > slope0:
        raise ConfigurationError(f"Breaking threshold {threshold} must exceed initial max|u_x| = {slope0}")
    if threshold > resolvable_slope(state) > 0:
        logger.warning("Breaking threshold %.4g exceeds the steepest slope the grid resolves (%.4g); "
                       "refine n for a reliable breaking time", threshold, resolvable_slope(state))

    logger.info("Starting run: b=%s form=%s n=%d length=%g t_end=%g",
                config.params.b, config.params.form.value, config.grid.n, config.grid.length, config.t_end)

    times: List[float] = [0.0]
    rows: List[Dict[str, float]] = [_sample(observers, state)]
    snapshots: List[Tuple[float, State]] = [(0.0, state)]
    next_snapshot = config.snapshot_interval
    leak_warned = False
    termination: Optional[Termination] = None

    n_blocks = max(1, math.ceil(config.t_end / config.cadence - 1e-9))
    for block in range(n_blocks):
        t_target = config.t_end if block == n_blocks - 1 else (block + 1) * config.cadence
        span = t_target - state.t
        dt = config.dt if config.dt is not None else cfl_dt(state, config.grid, config.cfl_safety, config.cadence)
        nsteps = max(1, math.ceil(span / dt - 1e-9))
        dt = span / nsteps
        for step in range(nsteps):
            try:
                stepped = step_rk4(state, dt, rhs)
            except NumericalFailureError as e:
                logger.error("Numerical failure: %s", e)
                termination = Termination(TerminationKind.NUMERICAL_FAILURE, state.t + dt, state, str(e))
                break
            if step == nsteps - 1:
                stepped = stepped.advanced(t_target, stepped.primary)
            slope = _max_slope(stepped)
            if slope > threshold:
                reason = "slope threshold"
                context = {"max_slope": slope, "threshold": threshold, "initial_slope": slope0,
                           "mckean": float(mckean_indicator(start.m))}
                logger.warning("Wave breaking at t=%.6g (max|u_x|=%.4g > %.4g, McKean pattern: %s)",
                               stepped.t, slope, threshold, bool(context["mckean"]))
                termination = Termination(TerminationKind.WAVE_BREAKING, stepped.t, state, reason, context)
                break
            state = stepped
        if termination is not None:
            break
        times.append(state.t)
        rows.append(_sample(observers, state))
        if not leak_warned and boundary_fraction(state.u) > LEAKAGE_LIMIT:
            logger.warning("Solution reaches the box edge at t=%.6g (boundary fraction %.3e)",
                           state.t, boundary_fraction(state.u))
            leak_warned = True
        if state.t >= next_snapshot - 1e-9:
            snapshots.append((state.t, state))
            while next_snapshot <= state.t + 1e-9:
                next_snapshot += config.snapshot_interval

    if termination is None:
        termination = Termination(TerminationKind.COMPLETED, state.t, state)
    if snapshots[-1][0] < state.t:
        snapshots.append((state.t, state))
    logger.info("Run finished: %s at t=%.6g after %d samples", termination.kind.value, termination.t, len(times))

    keys = list(rows[0].keys())
    series = {k: np.array([r.get(k, np.nan) for r in rows]) for k in keys}
    return Trajectory(config, snapshots, np.array(times), series, termination, start)
