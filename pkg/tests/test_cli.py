import json

import numpy as np
import pandas as pd
import pytest

from peakonlab import cli
from peakonlab.config import parse_config
from peakonlab.models import CheckReport, Status
from peakonlab.verification import check_shock_statics

ZERO_RUN = """\
[grid]
length = 32
n = 256

[simulation]
t_end = 0.5
cadence = 0.01
snapshot_interval = 0.25

[initial]
kind = zero

[mq]
c = 0.4
"""

MCKEAN_RUN = """\
[grid]
length = 64
n = 1024

[simulation]
form = m
t_end = 10

[initial]
kind = mckean
amplitudes = 1, -1
centers = -2, 2
width = 0.5
"""


def _simulate(write_config, tmp_path, text):
    out = tmp_path / "out"
    code = cli.main(["simulate", "--config", str(write_config(text)), "--out", str(out)])
    return code, out


def test_simulate_zero_data(write_config, tmp_path):
    code, out = _simulate(write_config, tmp_path, ZERO_RUN)
    assert code == 0
    series = pd.read_csv(out / "series.csv")
    assert len(series) == 51
    assert (series[["Iu", "Energy", "Hm", "Mq"]] == 0.0).all().all()
    np.testing.assert_allclose(series["t_func"], series["t_phys"] + 10.0)
    report = json.loads((out / "report.json").read_text(encoding="utf-8"))
    assert report["termination"]["kind"] == "Completed"
    assert report["growth"]["growth_exponent"] == "nan"
    assert "decade" in report["growth"]["growth_reason"]
    assert report["snapshot_times"] == pytest.approx([0.0, 0.25, 0.5], abs=1e-12)
    assert report["config"]["grid"]["n"] == 256
    assert (out / "plots.svg").exists()
    assert parse_config((out / "config.ini").read_text(encoding="utf-8")) == parse_config(ZERO_RUN)


def test_simulate_mckean_breaks(write_config, tmp_path):
    code, out = _simulate(write_config, tmp_path, MCKEAN_RUN)
    assert code == 2
    report = json.loads((out / "report.json").read_text(encoding="utf-8"))
    assert report["termination"]["kind"] == "WaveBreaking"
    assert 0.0 < report["termination"]["t"] < 10.0


def test_simulate_refuses_bad_config(write_config, tmp_path):
    code, out = _simulate(write_config, tmp_path, "[mq]\nq = 0.5\n")
    assert code == 1
    assert not out.exists()


def test_simulate_refuses_peakon_at_the_edge(write_config, tmp_path):
    text = "[grid]\nlength = 32\nn = 256\n[initial]\ncenters = 15.99\n"
    code, out = _simulate(write_config, tmp_path, text)
    assert code == 1
    assert not (out / "series.csv").exists()


def test_missing_config_is_an_io_failure(tmp_path):
    assert cli.main(["simulate", "--config", str(tmp_path / "nope.ini"), "--out", str(tmp_path)]) == 4


def test_out_defaults_to_output_directory(write_config, tmp_path):
    target = tmp_path / "from_config"
    path = write_config(ZERO_RUN + f"\n[output]\ndirectory = {target.as_posix()}\n")
    assert cli.main(["simulate", "--config", str(path)]) == 0
    assert (target / "series.csv").exists()


def test_sweep_cells_order_and_invalid_cells():
    config = parse_config(ZERO_RUN + "\n[sweep]\nb = 2, 3\nc = 0.4, 0.7\n")
    cells = cli.sweep_cells(config)
    assert [c.values for c in cells] == [
        {"b": 2.0, "c": 0.4}, {"b": 2.0, "c": 0.7}, {"b": 3.0, "c": 0.4}, {"b": 3.0, "c": 0.7},
    ]
    assert [c.config is None for c in cells] == [False, True, False, True]
    assert "c ≤ 2/(2+q) required" in cells[1].error
    assert cells[2].config.simulation.b == 3.0
    assert cells[2].config.mq.c == 0.4
    assert cells[2].config.sweep is None


def test_sweep_sigma_creates_exterior_section():
    cells = cli.sweep_cells(parse_config(ZERO_RUN + "\n[sweep]\nsigma = 1, 2\n"))
    assert [c.config.exterior.sigma for c in cells] == [1.0, 2.0]


@pytest.mark.parametrize("sweep", ["", "[sweep]\n", "[sweep]\nb = %s\nc = %s\n" % (
    ", ".join(["2"] * 101), ", ".join(["0.1"] * 100))])
def test_sweep_refuses_empty_or_oversized(write_config, tmp_path, sweep):
    path = write_config(ZERO_RUN + "\n" + sweep)
    assert cli.main(["sweep", "--config", str(path), "--out", str(tmp_path / "s")]) == 1
    assert not (tmp_path / "s" / "sweep.csv").exists()


def test_small_sweep(write_config, tmp_path):
    path = write_config(ZERO_RUN + "\n[sweep]\nb = 1, 2.5\n")
    out = tmp_path / "sweep"
    assert cli.main(["sweep", "--config", str(path), "--out", str(out), "--workers", "1"]) == 0
    table = pd.read_csv(out / "sweep.csv")
    assert list(table["b"]) == [1.0, 2.5]
    assert list(table["status"]) == ["Completed", "Completed"]
    assert (table["Iu_drift"] == 0.0).all()
    assert (out / "cells" / "cell_00001" / "series.csv").exists()


def test_verify_writes_report(monkeypatch, tmp_path):
    monkeypatch.setitem(cli.SUITES, "operators", [check_shock_statics])
    assert cli.main(["verify", "--suite", "operators", "--out", str(tmp_path), "--workers", "1"]) == 0
    report = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
    assert report["suite"] == "operators"
    assert report["summary"] == {"Pass": 1}


def test_verify_fails_on_any_failed_check(monkeypatch, tmp_path):
    failing = CheckReport(name="broken", status=Status.FAIL, measured=2.0, bound=1.0)
    monkeypatch.setitem(cli.SUITES, "decay", [lambda: failing])
    assert cli.main(["verify", "--suite", "decay", "--out", str(tmp_path)]) == 1


@pytest.mark.slow
def test_operator_suite_has_no_failures():
    reports = cli.run_suite("operators", workers=2)
    assert len(reports) > 20
    assert not [r.name for r in reports if r.status == Status.FAIL]


PEAKON_SWEEP = """\
[grid]
length = 64
n = 1024

[simulation]
t_end = 2
cadence = 0.01

[initial]
kind = peakon
amplitudes = 1
centers = 0
width = 0.2

[sweep]
b = 0.5, 1, 1.5, 2, 2.5, 3
"""


@pytest.mark.slow
def test_peakon_sweep_conserves_energy_best_at_b_two(write_config, tmp_path):
    out = tmp_path / "sweep"
    assert cli.main(["sweep", "--config", str(write_config(PEAKON_SWEEP)), "--out", str(out), "--workers", "2"]) == 0
    table = pd.read_csv(out / "sweep.csv")
    assert list(table["b"]) == [0.5, 1.0, 1.5, 2.0, 2.5, 3.0]
    assert (table["status"] == "Completed").all()
    assert table.loc[table["Energy_drift"].idxmin(), "b"] == 2.0
