"""
Pydantic models for peakonlab run configuration and verification reports.
Sections of the config file map one-to-one onto the *Section models below.
"""
import math
from enum import Enum
from typing import Annotated, Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field as PydanticField, field_validator, model_validator

from .dynamics import BFamilyParams, Form
from .errors import ConfigurationError
from .functionals import ExteriorFrame, ScaleParams
from .grid import Field, Grid, make_grid
from .helmholtz import helmholtz_forward
from .initial_data import (
    PeakonSpec, ShockPeakonSpec, from_momentum, gaussian_bumps, mckean_indicator, peakon_train,
    random_smooth, shock_peakon,
)
from .integrator import SimConfig
from .settings import get_output_dir

MAX_SWEEP_CELLS = 10_000


class Status(str, Enum):
    PASS = "Pass"
    FAIL = "Fail"
    INCONCLUSIVE = "Inconclusive"


class Direction(str, Enum):
    LE = "le"
    GE = "ge"


class CheckReport(BaseModel):
    """Outcome of one verification check; a Pass always satisfies measured <direction> bound."""

    name: str
    status: Status
    measured: float
    bound: float
    direction: Direction = Direction.LE
    context: Dict[str, Any] = PydanticField(default_factory=dict)

    def holds(self) -> bool:
        if self.direction == Direction.LE:
            return self.measured <= self.bound
        return self.measured >= self.bound

    @model_validator(mode="after")
    def _pass_satisfies_bound(self):
        if self.status == Status.PASS and not self.holds():
            raise ValueError(
                f"Check {self.name} marked Pass but {self.measured} {self.direction.value} {self.bound} is false"
            )
        return self


# ---------------------------------------------------------------- config sections

def _split_list(v):
    if isinstance(v, str):
        return [item.strip() for item in v.split(",") if item.strip()]
    return v


def _auto_to_none(v):
    if isinstance(v, str) and v.strip().lower() in ("auto", "none", ""):
        return None
    return v


FloatList = Annotated[List[float], BeforeValidator(_split_list)]
AutoFloat = Annotated[Optional[float], BeforeValidator(_auto_to_none)]


class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class GridSection(_Section):
    length: float = 128.0
    n: int = 4096

    @model_validator(mode="after")
    def _valid_grid(self):
        try:
            make_grid(self.length, self.n)
        except ConfigurationError as e:
            raise ValueError(str(e)) from e
        return self

    def build(self) -> Grid:
        return make_grid(self.length, self.n)


class SimulationSection(_Section):
    b: float = 2.0
    form: Form = Form.U
    t_end: float = 10.0
    dt: AutoFloat = None
    cfl_safety: float = 0.3
    cadence: float = 0.01
    breaking_threshold: AutoFloat = None
    snapshot_interval: float = 1.0

    @field_validator("b")
    @classmethod
    def _check_b(cls, v: float) -> float:
        if not 0 < v <= 3:
            raise ValueError("b must lie in (0, 3]")
        return v

    @field_validator("cfl_safety")
    @classmethod
    def _check_safety(cls, v: float) -> float:
        if not 0 < v <= 1:
            raise ValueError("cfl_safety must lie in (0, 1]")
        return v

    @field_validator("t_end", "cadence", "snapshot_interval")
    @classmethod
    def _check_positive(cls, v: float) -> float:
        if not (math.isfinite(v) and v > 0):
            raise ValueError("must be positive")
        return v

    @field_validator("dt", "breaking_threshold")
    @classmethod
    def _check_optional_positive(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and not (math.isfinite(v) and v > 0):
            raise ValueError("must be positive or auto")
        return v

    @model_validator(mode="after")
    def _cadence_fits(self):
        if self.cadence > self.t_end:
            raise ValueError("cadence must not exceed t_end")
        return self

    @property
    def params(self) -> BFamilyParams:
        return BFamilyParams(self.b, self.form)


class InitialKind(str, Enum):
    PEAKON = "peakon"
    MOMENTUM_GAUSSIAN = "momentum_gaussian"
    MCKEAN = "mckean"
    SHOCK_PEAKON = "shock_peakon"
    ZERO = "zero"
    RANDOM = "random"


class InitialSection(_Section):
    kind: InitialKind = InitialKind.PEAKON
    amplitudes: FloatList = [1.0]
    centers: FloatList = [0.0]
    width: float = 0.05
    k: float = 1.0
    t: float = 0.0
    max_mode: int = 16

    @model_validator(mode="after")
    def _consistent(self):
        if self.kind in (InitialKind.PEAKON, InitialKind.MOMENTUM_GAUSSIAN, InitialKind.MCKEAN):
            if len(self.amplitudes) != len(self.centers) or not self.amplitudes:
                raise ValueError("amplitudes and centers need the same nonzero length")
        if self.kind == InitialKind.PEAKON and self.width < 0:
            raise ValueError("width must be >= 0")
        if self.kind in (InitialKind.MOMENTUM_GAUSSIAN, InitialKind.MCKEAN) and not self.width > 0:
            raise ValueError("momentum bumps need width > 0")
        if self.kind == InitialKind.SHOCK_PEAKON and not (self.k > 0 and self.t >= 0):
            raise ValueError("shock peakon needs k > 0 and t >= 0")
        return self

    def build_u_or_m(self, grid: Grid, form: Form, seed: int) -> Field:
        """Initial primary field for the given formulation."""
        if self.kind == InitialKind.ZERO:
            return Field.zeros(grid)
        if self.kind in (InitialKind.MOMENTUM_GAUSSIAN, InitialKind.MCKEAN):
            m0 = gaussian_bumps(grid, self.amplitudes, self.centers, self.width)
            if self.kind == InitialKind.MCKEAN and not mckean_indicator(m0):
                raise ConfigurationError("mckean data needs positive momentum left of negative momentum")
            return m0 if form == Form.M else from_momentum(m0)
        if self.kind == InitialKind.PEAKON:
            u0 = peakon_train(PeakonSpec(tuple(self.amplitudes), tuple(self.centers), self.width), grid)
        elif self.kind == InitialKind.SHOCK_PEAKON:
            u0 = shock_peakon(ShockPeakonSpec(self.k, self.t), grid)
        else:
            u0 = random_smooth(grid, np.random.default_rng(seed), max_mode=self.max_mode)
        return u0 if form == Form.U else helmholtz_forward(u0)


class ExteriorSection(_Section):
    sigma: float = 4.0
    width: float = 50.0
    t0: float = 3.0
    shifted: bool = False
    side: str = "right"
    p: float = 2.0

    @field_validator("side")
    @classmethod
    def _check_side(cls, v: str) -> str:
        if v not in ("right", "left"):
            raise ValueError("side must be 'right' or 'left'")
        return v

    @model_validator(mode="after")
    def _valid_frame(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not self.width >= 10 * self.sigma:
            raise ValueError("L ≥ 10·sigma required")
        if not self.t0 > 2:
            raise ValueError("t0 must exceed 2")
        return self

    @property
    def frame(self) -> ExteriorFrame:
        return ExteriorFrame(sigma=self.sigma, width=self.width, t0=self.t0)


class OutputSection(_Section):
    directory: str = PydanticField(default_factory=get_output_dir)
    seed: int = 0


class SweepSection(_Section):
    b: FloatList = []
    c: FloatList = []
    q: FloatList = []
    sigma: FloatList = []

    @property
    def axes(self) -> Dict[str, List[float]]:
        return {k: v for k, v in (("b", self.b), ("c", self.c), ("q", self.q), ("sigma", self.sigma)) if v}

    @property
    def cell_count(self) -> int:
        axes = self.axes
        if not axes:
            return 0
        return int(np.prod([len(v) for v in axes.values()]))


class RunConfig(_Section):
    grid: GridSection = GridSection()
    simulation: SimulationSection = SimulationSection()
    initial: InitialSection = InitialSection()
    mq: Optional[ScaleParams] = None
    itanh: Optional[ScaleParams] = None
    epsi: Optional[ScaleParams] = None
    window: Optional[ScaleParams] = None
    exterior: Optional[ExteriorSection] = None
    output: OutputSection = PydanticField(default_factory=OutputSection)
    sweep: Optional[SweepSection] = None

    def sim_config(self) -> SimConfig:
        s = self.simulation
        return SimConfig(
            params=s.params,
            grid=self.grid.build(),
            t_end=s.t_end,
            dt=s.dt,
            cfl_safety=s.cfl_safety,
            cadence=s.cadence,
            breaking_threshold=s.breaking_threshold,
            snapshot_interval=s.snapshot_interval,
        )

    def initial_field(self) -> Field:
        return self.initial.build_u_or_m(self.grid.build(), self.simulation.form, self.output.seed)
