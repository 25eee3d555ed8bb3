import numpy as np
import pytest

from peakonlab.dynamics import (
    BFamilyParams, Form, State, cross_check_forms, flux, flux_parts, initial_state, momentum_flux,
    momentum_sign, rhs_for, rhs_m, rhs_u, source_coefficients,
)
from peakonlab.errors import ConfigurationError, DynamicsError
from peakonlab.grid import Field, Norm, integrate, make_grid, norm
from peakonlab.helmholtz import deriv, green_apply, helmholtz_forward
from peakonlab.initial_data import PeakonSpec, gaussian, peakon_train, random_smooth

B_VALUES = [0.5, 1.0, 2.0, 2.5, 3.0]


@pytest.mark.parametrize("b", [0.0, -1.0, 3.5, float("nan")])
def test_bad_family_parameter(b):
    with pytest.raises(ConfigurationError):
        BFamilyParams(b)


def test_named_members():
    assert BFamilyParams(2).is_camassa_holm
    assert BFamilyParams(3).is_degasperis_procesi
    assert not BFamilyParams(2.5).is_integrable
    assert BFamilyParams(2, "m").form == Form.M


def test_source_coefficients():
    assert source_coefficients(2.0) == (1.0, 0.5)
    assert source_coefficients(3.0) == (1.5, 0.0)


def test_momentum_sign(small_grid):
    g = gaussian(small_grid)
    assert momentum_sign(g) == 1
    assert momentum_sign(-g) == -1
    assert momentum_sign(Field.zeros(small_grid)) == 0
    assert momentum_sign(gaussian(small_grid, 1.0, -4.0) - gaussian(small_grid, 1.0, 4.0)) == 0


@pytest.mark.parametrize("b", B_VALUES)
def test_zero_is_stationary(small_grid, b):
    zero = Field.zeros(small_grid)
    assert rhs_u(zero, BFamilyParams(b)).max_abs() == 0.0
    assert rhs_m(zero, BFamilyParams(b, Form.M)).max_abs() == 0.0


@pytest.mark.parametrize("b", B_VALUES)
def test_forms_agree_on_smooth_data(small_grid, rng, b):
    u = random_smooth(small_grid, rng, max_mode=12)
    report = cross_check_forms(u, BFamilyParams(b))
    assert report.passed
    assert report.discrepancy <= 1e-6 * report.scale


@pytest.mark.parametrize("b", B_VALUES)
def test_rhs_conserves_mean(small_grid, rng, b):
    u = random_smooth(small_grid, rng)
    params = BFamilyParams(b)
    scale = rhs_u(u, params).max_abs()
    assert abs(integrate(rhs_u(u, params))) < 1e-11 * scale * small_grid.length
    m = helmholtz_forward(u)
    assert abs(integrate(rhs_m(m, params))) < 1e-11 * rhs_m(m, params).max_abs() * small_grid.length


@pytest.mark.parametrize("b", B_VALUES)
def test_flux_forms(small_grid, rng, b):
    params = BFamilyParams(b)
    u = random_smooth(small_grid, rng)
    f = flux(u, params)
    np.testing.assert_allclose((-deriv(f)).values, rhs_u(u, params).values, atol=1e-10)
    local, nonlocal_ = flux_parts(u, params)
    np.testing.assert_allclose((local + nonlocal_).values, f.values, atol=1e-14)
    m = helmholtz_forward(u)
    q = momentum_flux(m, params)
    rhs = rhs_m(m, params)
    np.testing.assert_allclose((-deriv(q)).values, rhs.values, atol=1e-9 * max(1.0, rhs.max_abs()))


def test_state_views_agree(small_grid, rng):
    m = random_smooth(small_grid, rng)
    state_m = initial_state(m, BFamilyParams(2.0, Form.M))
    state_u = initial_state(green_apply(m), BFamilyParams(2.0, Form.U))
    np.testing.assert_allclose(state_m.u.values, state_u.u.values, atol=1e-12)
    np.testing.assert_allclose(state_m.ux.values, state_u.ux.values, atol=1e-11)
    np.testing.assert_allclose(state_m.m.values, state_u.m.values, atol=1e-10)


def test_initial_sign_recorded_for_momentum_form(small_grid):
    g = gaussian(small_grid)
    assert initial_state(g, BFamilyParams(2.0, Form.M)).initial_sign == 1
    assert initial_state(g, BFamilyParams(2.0, Form.U)).initial_sign == 0
    later = initial_state(-g, BFamilyParams(2.0, Form.M)).advanced(1.0, g)
    assert later.initial_sign == -1
    assert later.t == 1.0


def test_state_time_must_be_finite(small_grid):
    with pytest.raises(DynamicsError):
        State(float("inf"), Field.zeros(small_grid), BFamilyParams())


def test_rhs_for_dispatch(small_grid, smooth_u):
    assert np.array_equal(rhs_for(BFamilyParams(2.0))(smooth_u).values, rhs_u(smooth_u, BFamilyParams(2.0)).values)
    m = helmholtz_forward(smooth_u)
    params = BFamilyParams(2.0, Form.M)
    assert np.array_equal(rhs_for(params)(m).values, rhs_m(m, params).values)


def test_momentum_flux_matches_rhs_m_on_peakon_momentum(medium_grid):
    m = helmholtz_forward(peakon_train(PeakonSpec((1.0,), (0.0,), 0.05), medium_grid))
    params = BFamilyParams(2.0, Form.M)
    rhs = rhs_m(m, params)
    np.testing.assert_allclose((-deriv(momentum_flux(m, params))).values, rhs.values,
                               atol=1e-9 * rhs.max_abs())


def test_camassa_holm_reduction(small_grid, rng):
    u = random_smooth(small_grid, rng, max_mode=12).values
    k = 2.0 * np.pi * np.fft.fftfreq(small_grid.n, d=small_grid.h)

    def dx(v):
        return np.real(np.fft.ifft(1j * k * np.fft.fft(v)))

    source = u * u + 0.5 * dx(u) ** 2
    expected = -dx(0.5 * u * u + np.real(np.fft.ifft(np.fft.fft(source) / (1.0 + k * k))))
    got = rhs_u(Field(small_grid, u), BFamilyParams(2.0)).values
    assert np.max(np.abs(got - expected)) <= 1e-12 * max(1.0, np.max(np.abs(expected)))


def test_peakon_is_nearly_a_traveling_wave():
    grid = make_grid(128.0, 4096)
    u0 = peakon_train(PeakonSpec((1.0,), (0.0,), 0.05), grid)
    ux = deriv(u0)
    residual = rhs_u(u0, BFamilyParams(2.0)) + ux
    assert norm(residual, Norm.lp(2)) / norm(ux, Norm.lp(2)) <= 0.05
