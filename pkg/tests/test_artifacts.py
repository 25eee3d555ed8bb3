import json
import math

import numpy as np
import pandas as pd
import pytest

from peakonlab import artifacts
from peakonlab.dynamics import BFamilyParams, Form
from peakonlab.functionals import ScaleParams, diagnostics_observer, mq_observer
from peakonlab.integrator import SimConfig, run
from peakonlab.models import CheckReport, Status


@pytest.fixture
def short_run(small_grid, smooth_u):
    cfg = SimConfig(params=BFamilyParams(2.0), grid=small_grid, t_end=0.2, cadence=0.05, snapshot_interval=0.1)
    return run(cfg, smooth_u, [diagnostics_observer, mq_observer(ScaleParams(c=0.4))])


def test_sanitize():
    cleaned = artifacts.sanitize({
        "a": np.float64(1.5), "b": np.int64(3), "c": math.inf, "d": [np.nan, 2.0],
        "e": Form.M, "f": np.bool_(True), "g": np.arange(2),
    })
    assert cleaned == {"a": 1.5, "b": 3, "c": "inf", "d": ["nan", 2.0], "e": "m", "f": True, "g": [0, 1]}
    assert type(cleaned["b"]) is int
    report = CheckReport(name="x", status=Status.INCONCLUSIVE, measured=math.nan, bound=1.0)
    assert artifacts.sanitize(report)["measured"] == "nan"


def test_series_columns(short_run):
    frame = artifacts.series_frame(short_run, 10.0)
    assert list(frame.columns[:7]) == artifacts.LEADING_COLUMNS
    assert {"Mq", "Mq:dt", "Mq:single", "Mq:bound", "Mq:local"} <= set(frame.columns)
    np.testing.assert_allclose(frame["t_func"], frame["t_phys"] + 10.0)
    assert len(frame) == 5


def test_series_without_functionals_has_empty_clock(short_run):
    frame = artifacts.series_frame(short_run, None)
    assert frame["t_func"].isna().all()


def test_series_csv_is_lossless_and_stable(tmp_path, short_run):
    path = artifacts.write_series(tmp_path / "a", short_run, 10.0)
    again = artifacts.write_series(tmp_path / "b", short_run, 10.0)
    raw = path.read_bytes()
    assert raw == again.read_bytes()
    assert b"\r\n" in raw
    assert raw.splitlines()[0].decode().startswith("t_phys,t_func,Iu,Energy,Hm,min_m,max_slope")
    frame = pd.read_csv(path, float_precision="round_trip")
    np.testing.assert_array_equal(frame["Hm"].to_numpy(), short_run.series["Hm"])


def test_snapshots_csv(tmp_path, short_run):
    path = artifacts.write_snapshots(tmp_path, short_run)
    frame = pd.read_csv(path, float_precision="round_trip")
    assert list(frame.columns) == ["t", "x", "u", "m"]
    assert len(frame) == len(short_run.snapshots) * short_run.config.grid.n
    first = frame[frame["t"] == 0.0]
    np.testing.assert_array_equal(first["u"].to_numpy(), short_run.initial.u.values)


def test_report_json(tmp_path, short_run):
    payload = {
        "termination": artifacts.termination_record(short_run.termination),
        "nan": math.nan,
    }
    path = artifacts.write_report(tmp_path / "nested", payload)
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["termination"]["kind"] == "Completed"
    assert data["termination"]["exit_code"] == 0
    assert data["termination"]["t"] == 0.2
    assert data["nan"] == "nan"


def test_checks_payload():
    reports = [
        CheckReport(name="a", status=Status.PASS, measured=0.0, bound=1.0),
        CheckReport(name="b", status=Status.FAIL, measured=2.0, bound=1.0),
        CheckReport(name="c", status=Status.PASS, measured=0.5, bound=1.0),
    ]
    payload = artifacts.checks_payload(reports, "operators")
    assert payload["summary"] == {"Pass": 2, "Fail": 1}
    assert [c["name"] for c in payload["checks"]] == ["a", "b", "c"]


def test_plots_svg(tmp_path, short_run):
    path = artifacts.write_plots(tmp_path, short_run, 10.0)
    text = path.read_text(encoding="utf-8")
    assert path.name == "plots.svg"
    assert "<svg" in text


def test_sweep_table(tmp_path):
    rows = [{"cell": 0, "b": 1.0, "status": "Completed"}, {"cell": 1, "b": 2.0, "status": "invalid", "error": "x"}]
    path = artifacts.write_sweep_table(tmp_path / "sweep.csv", rows)
    frame = pd.read_csv(path)
    assert list(frame["status"]) == ["Completed", "invalid"]
    assert frame["error"].isna().tolist() == [True, False]
