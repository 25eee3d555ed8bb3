"""Shared fixtures for the peakonlab test suite."""
import numpy as np
import pytest

from peakonlab.dynamics import BFamilyParams, Form, initial_state
from peakonlab.grid import make_grid
from peakonlab.initial_data import PeakonSpec, gaussian, peakon_train


@pytest.fixture
def small_grid():
    return make_grid(32.0, 256)


@pytest.fixture
def medium_grid():
    return make_grid(64.0, 1024)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def smooth_u(small_grid):
    return gaussian(small_grid, 0.5, 0.0, 1.0)


@pytest.fixture
def peakon_state(medium_grid):
    u0 = peakon_train(PeakonSpec((1.0,), (0.0,), 0.1), medium_grid)
    return initial_state(u0, BFamilyParams(2.0, Form.U))


@pytest.fixture
def write_config(tmp_path):
    """Write config text to a file and return its path."""
    def write(text, name="run.ini"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path
    return write
