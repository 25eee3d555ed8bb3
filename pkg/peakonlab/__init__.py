"""
peakonlab - numerical laboratory for peakon solutions of the b-family.
"""
from .dynamics import BFamilyParams, Form, State
from .errors import LabError
from .grid import Field, Grid, make_grid
from .integrator import SimConfig, Trajectory, run

__all__ = [
    "BFamilyParams",
    "Field",
    "Form",
    "Grid",
    "LabError",
    "SimConfig",
    "State",
    "Trajectory",
    "make_grid",
    "run",
]
