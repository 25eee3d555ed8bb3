"""Long benchmark runs; deselected by default, run with ``pytest -m slow``."""
import pytest

from peakonlab import cli
from peakonlab.models import Status
from peakonlab.verification import relative_drift

pytestmark = pytest.mark.slow


@pytest.mark.parametrize("b", [2.0, 2.5])
def test_peakon_conserves_invariants(b):
    reports = cli._conservation(b)
    assert reports[0].status == Status.PASS, reports[0].context
    if b == 2.0:
        wave = reports[1]
        assert wave.status == Status.PASS, wave.context
        assert wave.context["fitted_speed"] == pytest.approx(1.0, rel=0.03)


@pytest.mark.parametrize("b", [2.0, 3.0])
def test_nonnegative_momentum_stays_nonnegative(b):
    report = cli._sign_preservation(b)
    assert report.status == Status.PASS
    assert report.context["termination"] == "Completed"


def test_functional_derivatives_on_the_benchmark():
    mq, itanh = cli._functional_derivatives()
    assert mq.status == Status.PASS, mq.context
    assert itanh.status == Status.PASS, itanh.context
    assert mq.context["five_term_vs_single"] < 1e-10


def test_exterior_functional_decreases():
    derivative, decay = cli._exterior()
    assert derivative.status == Status.PASS, derivative.context
    assert derivative.context["sign_checked"] is True
    assert derivative.context["max_derivative"] <= 1e-10
    assert decay.status == Status.PASS, decay.context


def test_decay_trends_never_fail():
    report = cli._decay()
    assert report.status in (Status.PASS, Status.INCONCLUSIVE)
    assert report.context["local_energy_integral_monotone"] is True
    assert report.context["termination"] == "Completed"
    assert report.context["decrease"] >= 0.9, report.context
    assert report.context["oscillation_within_limit"] is True, report.context
    assert report.context["local_virial_integral_monotone"] is True


def test_energy_drift_shrinks_as_the_grid_doubles():
    drifts = []
    for n in (1024, 2048, 4096):
        traj = cli._benchmark_run(2.0, n=n, t_end=2.0, cadence=0.05)
        assert traj.completed
        drifts.append(relative_drift(traj.series["Energy"]))
    assert drifts[0] > drifts[1] > drifts[2], drifts
