import math

import numpy as np
import pytest
from pydantic import ValidationError

from peakonlab.dynamics import BFamilyParams, Form
from peakonlab.functionals import ExteriorFrame, ScaleParams, diagnostics_observer, exterior_observer
from peakonlab.grid import Field, make_grid
from peakonlab.helmholtz import helmholtz_forward
from peakonlab.initial_data import gaussian, random_smooth
from peakonlab.integrator import SimConfig, run
from peakonlab.models import CheckReport, Direction, Status
from peakonlab.verification import (
    GREEN_LEMMA_GRIDS, benchmark_peakon, centered_differences, check_conservation, check_decay_trends,
    check_exterior_decay, check_form_equivalence, check_functional_derivative, check_green_lemma,
    check_green_reference_grid, check_green_uniformity, check_oracle_equivalence, check_p_estimate,
    check_rk4_order, check_scale_identities, check_shock_statics, check_sign_preservation, check_traveling_wave,
    check_weight_facts, fit_traveling_shift, is_nonnegative, relative_drift,
)


def test_pass_must_satisfy_bound():
    with pytest.raises(ValidationError):
        CheckReport(name="x", status=Status.PASS, measured=2.0, bound=1.0)
    with pytest.raises(ValidationError):
        CheckReport(name="x", status=Status.PASS, measured=0.5, bound=1.0, direction=Direction.GE)
    report = CheckReport(name="x", status=Status.FAIL, measured=2.0, bound=1.0)
    assert not report.holds()


def test_green_lemma_at_lambda_ten():
    length, n = GREEN_LEMMA_GRIDS[10.0]
    report = check_green_lemma(10.0, make_grid(length, n))
    assert report.status == Status.PASS
    assert report.measured <= 1e-6
    assert report.context["kink_error_scale"] > 0


def test_green_lemma_edge_cases():
    with pytest.raises(ValueError):
        check_green_lemma(1.0, make_grid(256.0, 4096))
    report = check_green_lemma(10.0, make_grid(128.0, 4096))
    assert report.status == Status.INCONCLUSIVE
    assert "box length" in report.context["reason"]


def test_green_uniformity():
    reports = check_green_uniformity()
    assert [r.status for r in reports] == [Status.PASS] * 4
    errors = reports[-1].context["errors"]
    assert errors == sorted(errors, reverse=True)


def test_green_lemma_on_the_reference_grid_never_fails():
    report = check_green_reference_grid()
    assert report.name == "green_lemma_reference[lambda=10,n=8192]"
    assert report.status in (Status.PASS, Status.INCONCLUSIVE)
    assert report.measured <= report.context["kink_error_scale"]
    if report.status == Status.INCONCLUSIVE:
        assert "kink" in report.context["reason"]
        assert report.measured > 1e-6


def test_oracle_equivalence():
    report = check_oracle_equivalence(n_fields=5)
    assert report.status == Status.PASS


def test_p_estimate(rng):
    grid = make_grid(64.0, 2048)
    m = random_smooth(grid, rng, nonnegative=True)
    report = check_p_estimate(m)
    assert report.status == Status.PASS
    assert all(v >= 0 for v in report.context["margins"].values())
    signed = check_p_estimate(random_smooth(grid, rng))
    assert signed.status == Status.INCONCLUSIVE


def test_form_equivalence():
    assert check_form_equivalence(n_fields=3).status == Status.PASS


def test_operator_facts():
    for report in check_weight_facts() + check_scale_identities() + [check_shock_statics()]:
        assert report.status == Status.PASS, report.name


def test_sech2_unit_constants_fail():
    by_name = {r.name: r for r in check_weight_facts()}
    assert by_name["sech2_slope_ratio"].context["unit_constant_holds"] is False
    assert by_name["sech2_curvature_ratio"].context["unit_constant_holds"] is False


def test_relative_drift():
    assert relative_drift(np.array([2.0, 2.0, 2.2])) == pytest.approx(0.1)
    assert relative_drift(np.zeros(4)) == 0.0


def test_centered_differences():
    t = np.linspace(0.0, 1.0, 11)
    np.testing.assert_allclose(centered_differences(t, t ** 2), 2 * t[1:-1], atol=1e-12)


@pytest.fixture
def smooth_run(small_grid, smooth_u):
    cfg = SimConfig(params=BFamilyParams(2.0), grid=small_grid, t_end=1.0, cadence=0.01)
    return run(cfg, smooth_u, [diagnostics_observer])


def test_conservation_on_smooth_run(smooth_run):
    report = check_conservation(smooth_run, tol_rel=1e-6, energy_tol=1e-4)
    assert report.status == Status.PASS
    assert report.context["energy_gated"] is True


def test_sign_preservation():
    grid = make_grid(64.0, 512)
    cfg = SimConfig(params=BFamilyParams(2.0, Form.M), grid=grid, t_end=1.0, cadence=0.01)
    traj = run(cfg, 0.1 * gaussian(grid, 1.0, 0.0, 2.0), [diagnostics_observer])
    report = check_sign_preservation(traj)
    assert report.status == Status.PASS
    assert report.direction == Direction.GE


def test_sign_preservation_needs_nonnegative_data(small_grid):
    m0 = gaussian(small_grid, 1.0, -3.0) - gaussian(small_grid, 1.0, 3.0)
    cfg = SimConfig(params=BFamilyParams(2.0, Form.M), grid=small_grid, t_end=0.1, cadence=0.05)
    assert check_sign_preservation(run(cfg, m0)).status == Status.INCONCLUSIVE


def test_derivative_check_needs_fine_cadence(small_grid, smooth_u):
    cfg = SimConfig(params=BFamilyParams(2.0), grid=small_grid, t_end=1.0, cadence=0.1)
    traj = run(cfg, smooth_u, [diagnostics_observer])
    assert check_functional_derivative(traj, "Mq").status == Status.INCONCLUSIVE


def test_derivative_check_needs_the_series(smooth_run):
    report = check_functional_derivative(smooth_run, "ITanh")
    assert report.status == Status.INCONCLUSIVE
    assert "not observed" in report.context["reason"]


def test_decay_trends_on_zero_data(small_grid):
    cfg = SimConfig(params=BFamilyParams(2.0), grid=small_grid, t_end=2.0, cadence=0.1, snapshot_interval=0.5)
    traj = run(cfg, Field.zeros(small_grid))
    report = check_decay_trends(traj, ScaleParams())
    assert report.status == Status.PASS
    assert report.measured == 1.0


def test_decay_trends_short_run_is_inconclusive(smooth_run):
    report = check_decay_trends(smooth_run, ScaleParams())
    assert report.status == Status.INCONCLUSIVE
    assert report.context["window_growth"] < 2.0


def test_decay_trends_reports_virial_integral_and_growth(smooth_run):
    context = check_decay_trends(smooth_run, ScaleParams()).context
    assert context["local_virial_integral"] > 0
    assert context["local_virial_integral_monotone"] is True
    assert context["local_energy_integral_monotone"] is True
    assert math.isnan(context["growth_exponent"])
    assert "decade" in context["growth_reason"]
    # m = u - u_xx of a Gaussian u changes sign
    assert context["sandwich_holds"] is None


def test_decay_trends_sandwich_on_nonnegative_momentum():
    grid = make_grid(64.0, 512)
    cfg = SimConfig(params=BFamilyParams(2.0, Form.M), grid=grid, t_end=1.0, cadence=0.01,
                    snapshot_interval=0.25)
    traj = run(cfg, 0.1 * gaussian(grid, 1.0, 0.0, 2.0), [diagnostics_observer])
    context = check_decay_trends(traj, ScaleParams()).context
    assert context["sandwich_holds"] is True
    assert 1.0 / math.cosh(1.0) ** 2 <= context["sandwich_min_weight"] <= 1.0
    assert context["sandwich_upper_bound_final"] > 0


def test_fit_traveling_shift_recovers_a_translation():
    grid = make_grid(64.0, 1024)
    u0 = gaussian(grid, 1.0, 0.0, 1.0)
    moved = gaussian(grid, 1.0, 3.3, 1.0)
    shift, err = fit_traveling_shift(u0, moved, 3.0)
    assert shift == pytest.approx(3.3, abs=1e-6)
    assert err < 1e-6


def test_rk4_order():
    report = check_rk4_order()
    assert report.status == Status.PASS
    assert report.context["ratio"] == pytest.approx(16.0, rel=0.2)


def test_report_is_json_ready():
    report = check_shock_statics()
    dumped = report.model_dump(mode="json")
    assert dumped["status"] == "Pass"
    assert math.isfinite(dumped["measured"])


def test_exterior_decay(small_grid, smooth_run):
    frame = ExteriorFrame(sigma=4.0, width=40.0)
    zero = run(SimConfig(params=BFamilyParams(2.0), grid=small_grid, t_end=0.5, cadence=0.1), Field.zeros(small_grid))
    assert check_exterior_decay(zero, frame).status == Status.INCONCLUSIVE
    report = check_exterior_decay(smooth_run, frame)
    assert report.measured < 0.1
    assert report.context["final"] < report.context["initial"]


def test_traveling_wave_report(smooth_run):
    report = check_traveling_wave(smooth_run, speed=0.5)
    assert report.context["fitted_speed"] > 0.0
    assert report.context["t_end"] == 1.0


def test_is_nonnegative_tolerates_round_off_ripple(small_grid):
    m = gaussian(small_grid, 1.0, 0.0, 1.0)
    assert is_nonnegative(m)
    assert is_nonnegative(Field(small_grid, m.values - 1e-10))
    assert not is_nonnegative(Field(small_grid, m.values - 1e-6))


def test_exterior_derivative_on_a_momentum_form_run():
    grid = make_grid(64.0, 1024)
    frame = ExteriorFrame(sigma=2.0, width=20.0)
    m0 = helmholtz_forward(benchmark_peakon(grid, amplitude=0.5, width=0.2))
    cfg = SimConfig(params=BFamilyParams(2.0, Form.M), grid=grid, t_end=2.0, cadence=0.01)
    traj = run(cfg, m0, [diagnostics_observer, exterior_observer(frame)])
    report = check_functional_derivative(traj, "Exterior", frame)
    assert report.status == Status.PASS, report.context
    assert report.context["sign_checked"] is True
    assert report.context["max_derivative"] <= 1e-10
