"""
Command-line entry points: simulate, verify and sweep.

Exit codes: 0 completed (verify: no Fail), 1 refused input, 2 wave breaking,
3 numerical failure, 4 I/O failure.
"""
import argparse
import itertools
import logging
import sys
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError

from . import artifacts
from .config import load_config, render_config
from .dynamics import BFamilyParams, Form
from .errors import LabError, ParseError
from .functionals import (
    ExteriorFrame, ScaleParams, diagnostics_observer, epsi_observer, exterior_observer, itanh_observer,
    mq_observer, window_observer,
)
from .grid import make_grid
from .helmholtz import helmholtz_forward
from .initial_data import PeakonSpec, gaussian, peakon_train, random_smooth
from .integrator import Observer, SimConfig, Trajectory, run
from .models import MAX_SWEEP_CELLS, CheckReport, RunConfig, Status
from .settings import configure_logging, get_output_dir, get_runtime_config, get_worker_count
from .verification import (
    benchmark_peakon, check_conservation, check_decay_trends, check_exterior_decay,
    check_form_equivalence, check_functional_derivative, check_green_reference_grid, check_green_uniformity,
    check_oracle_equivalence, check_p_estimate, check_rk4_order, check_scale_identities, check_shock_statics,
    check_sign_preservation, check_traveling_wave, check_weight_facts, growth_summary, relative_drift,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_REFUSED = 1
EXIT_IO = 4

SCALE_SECTIONS = ("mq", "itanh", "epsi", "window")


# ---------------------------------------------------------------- simulate

def build_observers(config: RunConfig) -> Tuple[List[Observer], Optional[float]]:
    """Observers requested by the config and the functional-clock offset for t_func."""
    observers: List[Observer] = [diagnostics_observer]
    offset = None
    factories = {"mq": mq_observer, "itanh": itanh_observer, "epsi": epsi_observer, "window": window_observer}
    for name in SCALE_SECTIONS:
        sp = getattr(config, name)
        if sp is None:
            continue
        observers.append(factories[name](sp))
        if offset is None:
            offset = sp.t_offset
    if config.exterior is not None:
        e = config.exterior
        observers.append(exterior_observer(e.frame, e.shifted, e.side, e.p))
    return observers, offset


def simulate(config: RunConfig, out_dir: Union[str, Path]) -> Tuple[int, Optional[Trajectory]]:
    """Run one simulation and write its artifacts; returns (exit code, trajectory)."""
    out = Path(out_dir)
    try:
        sim = config.sim_config()
        initial = config.initial_field()
        observers, offset = build_observers(config)
        traj = run(sim, initial, observers)
    except LabError as e:
        logger.error("Refusing run: %s", e)
        return EXIT_REFUSED, None
    try:
        (out / "config.ini").parent.mkdir(parents=True, exist_ok=True)
        (out / "config.ini").write_text(render_config(config), encoding="utf-8")
        artifacts.write_series(out, traj, offset)
        artifacts.write_snapshots(out, traj)
        artifacts.write_plots(out, traj, offset)
        artifacts.write_report(out, {
            "command": "simulate",
            "config": config,
            "termination": artifacts.termination_record(traj.termination),
            "samples": int(traj.times.size),
            "growth": growth_summary(traj),
            "snapshot_times": [t for t, _ in traj.snapshots],
            "t_offset": offset,
            "runtime": get_runtime_config(),
        })
    except OSError as e:
        logger.error("Could not write artifacts to %s: %s", out, e)
        return EXIT_IO, traj
    return traj.termination.exit_code, traj


def cmd_simulate(args: argparse.Namespace) -> int:
    try:
        config = load_config(args.config)
    except ParseError as e:
        logger.error("Config error in %s: %s", args.config, e)
        return EXIT_REFUSED
    except OSError as e:
        logger.error("Could not read %s: %s", args.config, e)
        return EXIT_IO
    code, _ = simulate(config, args.out or config.output.directory)
    return code


# ---------------------------------------------------------------- verify

Task = Callable[[], Union[CheckReport, List[CheckReport]]]


# b = 2 energy drift of the benchmark is an RK4 error, O(dt^4); 0.3 sits at 1.25e-5
BENCHMARK_SAFETY = 0.1


def _benchmark_run(b: float, observers: Sequence[Observer] = (diagnostics_observer,),
                   length: float = 128.0, n: int = 4096, t_end: float = 10.0,
                   cadence: float = 0.01) -> Trajectory:
    grid = make_grid(length, n)
    cfg = SimConfig(params=BFamilyParams(b, Form.U), grid=grid, t_end=t_end, cadence=cadence,
                    cfl_safety=BENCHMARK_SAFETY)
    return run(cfg, benchmark_peakon(grid), observers)


def _p_estimates(count: int = 20, seed: int = 3) -> List[CheckReport]:
    grid = make_grid(64.0, 2048)
    rng = np.random.default_rng(seed)
    reports = []
    for i in range(count):
        m = random_smooth(grid, rng, nonnegative=True)
        reports.append(check_p_estimate(m).model_copy(update={"name": f"p_estimate[{i}]"}))
    return reports


def _conservation(b: float) -> List[CheckReport]:
    traj = _benchmark_run(b)
    reports = [check_conservation(traj, tol_rel=1e-6, energy_tol=1e-5)
               .model_copy(update={"name": f"conservation[b={b:g}]"})]
    if b == 2.0:
        reports.append(check_traveling_wave(traj, speed=1.0))
    return reports


def _sign_preservation(b: float) -> CheckReport:
    grid = make_grid(128.0, 2048)
    cfg = SimConfig(params=BFamilyParams(b, Form.M), grid=grid, t_end=10.0, cadence=0.01)
    traj = run(cfg, 0.1 * gaussian(grid, 1.0, 0.0, 2.0), (diagnostics_observer,))
    return check_sign_preservation(traj).model_copy(update={"name": f"sign_preservation[b={b:g}]"})


def _functional_derivatives() -> List[CheckReport]:
    mq, itanh = ScaleParams(c=0.4, q=2.0), ScaleParams(c=0.5, q=2.0)
    traj = _benchmark_run(2.0, (diagnostics_observer, mq_observer(mq), itanh_observer(itanh)))
    return [check_functional_derivative(traj, "Mq", mq), check_functional_derivative(traj, "ITanh", itanh)]


# mollifier whose spectrum is below 1e-9 at |j| = n/3 for h <= 0.0625
RESOLVED_MOLLIFIER = 0.2


def _exterior() -> List[CheckReport]:
    frame = ExteriorFrame(sigma=4.0, width=50.0)
    grid = make_grid(256.0, 8192)
    m0 = helmholtz_forward(benchmark_peakon(grid, width=RESOLVED_MOLLIFIER))
    cfg = SimConfig(params=BFamilyParams(2.0, Form.M), grid=grid, t_end=20.0, cadence=0.01,
                    cfl_safety=BENCHMARK_SAFETY)
    traj = run(cfg, m0, (diagnostics_observer, exterior_observer(frame)))
    return [check_functional_derivative(traj, "Exterior", frame), check_exterior_decay(traj, frame)]


def _decay() -> CheckReport:
    grid = make_grid(512.0, 8192)
    cfg = SimConfig(params=BFamilyParams(2.0, Form.U), grid=grid, t_end=60.0, cadence=0.05)
    u0 = peakon_train(PeakonSpec((2.0, 1.0), (1.0, -1.0), RESOLVED_MOLLIFIER), grid)
    traj = run(cfg, u0, (diagnostics_observer,))
    return check_decay_trends(traj, ScaleParams(c=0.5, q=2.0, t_offset=10.0), decrease_target=0.9)


SUITES: Dict[str, List[Task]] = {
    "operators": [
        check_green_uniformity,
        check_green_reference_grid,
        check_oracle_equivalence,
        _p_estimates,
        check_form_equivalence,
        check_weight_facts,
        check_scale_identities,
        check_shock_statics,
    ],
    "conservation": [
        lambda: _conservation(2.0),
        lambda: _conservation(2.5),
        lambda: _sign_preservation(2.0),
        lambda: _sign_preservation(3.0),
        check_rk4_order,
    ],
    "functionals": [_functional_derivatives, _exterior],
    "decay": [_decay],
}


def run_suite(name: str, workers: int = 1) -> List[CheckReport]:
    tasks = [t for suite in SUITES for t in SUITES[suite]] if name == "all" else SUITES[name]
    logger.info("Running suite %s with %d checks on %d workers", name, len(tasks), workers)
    reports: List[CheckReport] = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for result in pool.map(lambda task: task(), tasks):
            reports.extend(result if isinstance(result, list) else [result])
    return reports


def cmd_verify(args: argparse.Namespace) -> int:
    reports = run_suite(args.suite, args.workers or get_worker_count())
    out = args.out or get_output_dir()
    try:
        artifacts.write_report(out, artifacts.checks_payload(reports, args.suite))
    except OSError as e:
        logger.error("Could not write report to %s: %s", out, e)
        return EXIT_IO
    failed = [r.name for r in reports if r.status == Status.FAIL]
    if failed:
        logger.error("Failed checks: %s", ", ".join(failed))
        return 1
    return EXIT_OK


# ---------------------------------------------------------------- sweep

@dataclass(frozen=True)
class SweepCell:
    index: int
    values: Dict[str, float]
    config: Optional[RunConfig]
    error: str = ""


def sweep_cells(config: RunConfig) -> List[SweepCell]:
    """Cartesian product of the sweep axes, b then c then q then sigma, each cell validated."""
    axes = config.sweep.axes if config.sweep is not None else {}
    names = list(axes)
    base = config.model_dump(mode="python")
    base["sweep"] = None
    cells = []
    for index, combo in enumerate(itertools.product(*(axes[k] for k in names))):
        values = dict(zip(names, combo))
        data = {k: (dict(v) if isinstance(v, dict) else v) for k, v in base.items()}
        if "b" in values:
            data["simulation"] = {**data["simulation"], "b": values["b"]}
        scale = {k: values[k] for k in ("c", "q") if k in values}
        if scale:
            present = [s for s in SCALE_SECTIONS if data[s] is not None] or ["mq"]
            for s in present:
                data[s] = {**(data[s] or {}), **scale}
        if "sigma" in values:
            data["exterior"] = {**(data["exterior"] or {}), "sigma": values["sigma"]}
        try:
            cells.append(SweepCell(index, values, RunConfig.model_validate(data)))
        except ValidationError as e:
            err = e.errors()[0]
            msg = err["msg"].removeprefix("Value error, ")
            cells.append(SweepCell(index, values, None, f"{'.'.join(map(str, err['loc']))}: {msg}"))
    return cells


def run_cell(cell: SweepCell, out_dir: str) -> Dict[str, Any]:
    """Simulate one cell into its own directory and summarize it as one row."""
    row: Dict[str, Any] = {"cell": cell.index, **cell.values}
    if cell.config is None:
        row.update(status="invalid", error=cell.error)
        return row
    cell_dir = Path(out_dir) / "cells" / f"cell_{cell.index:05d}"
    code, traj = simulate(cell.config, cell_dir)
    if traj is None:
        row.update(status="invalid", error="initial data refused")
        return row
    row.update(status=traj.termination.kind.value, exit_code=code, t_final=traj.termination.t)
    for key in ("Iu", "Energy", "Hm"):
        row[f"{key}_final"] = float(traj.series[key][-1])
        row[f"{key}_drift"] = relative_drift(traj.series[key])
    row["max_slope_final"] = float(traj.series["max_slope"][-1])
    for key, values in traj.series.items():
        if key not in ("Iu", "Energy", "Hm", "max_slope") and ":" not in key and not key.startswith("window"):
            row[f"{key}_final"] = float(values[-1])
    logger.info("Sweep cell %d (%s) finished: %s", cell.index, cell.values, row["status"])
    return row


def cmd_sweep(args: argparse.Namespace) -> int:
    try:
        config = load_config(args.config)
    except ParseError as e:
        logger.error("Config error in %s: %s", args.config, e)
        return EXIT_REFUSED
    except OSError as e:
        logger.error("Could not read %s: %s", args.config, e)
        return EXIT_IO
    count = config.sweep.cell_count if config.sweep is not None else 0
    if count == 0:
        logger.error("Refusing sweep: the [sweep] section names no values")
        return EXIT_REFUSED
    if count > MAX_SWEEP_CELLS:
        logger.error("Refusing sweep: %d cells exceed the limit of %d", count, MAX_SWEEP_CELLS)
        return EXIT_REFUSED
    cells = sweep_cells(config)
    out = args.out or config.output.directory
    workers = args.workers or get_worker_count()
    logger.info("Sweeping %d cells on %d workers", len(cells), workers)
    try:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run_cell, cells, itertools.repeat(str(out))))
        artifacts.write_sweep_table(Path(out) / "sweep.csv", rows)
    except OSError as e:
        logger.error("Sweep I/O failure under %s: %s", out, e)
        return EXIT_IO
    return EXIT_OK


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="peakonlab", description="b-family peakon numerical lab")
    parser.add_argument("--log-level", default=None, help="overrides PEAKONLAB_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one simulation from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="defaults to output.directory")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", choices=[*SUITES, "all"], default="all")
    p.add_argument("--out", default=None, help="defaults to output.directory")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("sweep", help="run a parameter sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="defaults to output.directory")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(handler=cmd_sweep)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
