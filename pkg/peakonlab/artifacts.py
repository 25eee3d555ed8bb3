"""
Run artifacts: series.csv, snapshots.csv, report.json and plots.svg.

Every writer creates its parent directory and lets OSError propagate; the CLI maps
those to the I/O exit status.
"""
import json
import logging
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
from pydantic import BaseModel  # noqa: E402

from .integrator import Termination, Trajectory  # noqa: E402
from .models import CheckReport  # noqa: E402

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
SERIES_FILE = "series.csv"
SNAPSHOT_FILE = "snapshots.csv"
REPORT_FILE = "report.json"
PLOT_FILE = "plots.svg"

# columns that lead every series.csv, in this order
LEADING_COLUMNS = ["t_phys", "t_func", "Iu", "Energy", "Hm", "min_m", "max_slope"]


def sanitize(value: Any) -> Any:
    """JSON-safe copy: numpy scalars become Python numbers, non-finite floats become strings."""
    if isinstance(value, BaseModel):
        return sanitize(value.model_dump(mode="python"))
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Mapping):
        return {str(k): sanitize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [sanitize(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        f = float(value)
        return f if math.isfinite(f) else repr(f)
    return value


def _prepare(path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def series_frame(traj: Trajectory, t_offset: Optional[float]) -> pd.DataFrame:
    """Observer series as a table with physical and functional-clock time columns."""
    data: Dict[str, np.ndarray] = {
        "t_phys": traj.times,
        "t_func": traj.times + t_offset if t_offset is not None else np.full(traj.times.shape, np.nan),
    }
    data.update(traj.series)
    frame = pd.DataFrame(data)
    leading = [c for c in LEADING_COLUMNS if c in frame.columns]
    rest = [c for c in frame.columns if c not in leading]
    return frame[leading + rest]


def write_series(out_dir: Path, traj: Trajectory, t_offset: Optional[float]) -> Path:
    path = _prepare(Path(out_dir) / SERIES_FILE)
    frame = series_frame(traj, t_offset)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\r\n")
    logger.info("Wrote %d rows to %s", len(frame), path)
    return path


def write_snapshots(out_dir: Path, traj: Trajectory) -> Path:
    """Long table with one row per (snapshot time, node)."""
    path = _prepare(Path(out_dir) / SNAPSHOT_FILE)
    frames = [
        pd.DataFrame({"t": np.full(state.grid.n, t), "x": state.grid.nodes,
                      "u": state.u.values, "m": state.m.values})
        for t, state in traj.snapshots
    ]
    frame = pd.concat(frames, ignore_index=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\r\n")
    logger.info("Wrote %d snapshots to %s", len(traj.snapshots), path)
    return path


def termination_record(termination: Termination) -> Dict[str, Any]:
    return {
        "kind": termination.kind.value,
        "t": termination.t,
        "reason": termination.reason,
        "exit_code": termination.exit_code,
        "context": dict(termination.context),
    }


def write_report(out_dir: Path, payload: Mapping[str, Any]) -> Path:
    path = _prepare(Path(out_dir) / REPORT_FILE)
    path.write_text(json.dumps(sanitize(payload), indent=2, allow_nan=False) + "\n", encoding="utf-8")
    logger.info("Wrote report to %s", path)
    return path


def checks_payload(reports: Sequence[CheckReport], suite: str) -> Dict[str, Any]:
    counts: Dict[str, int] = {}
    for r in reports:
        counts[r.status.value] = counts.get(r.status.value, 0) + 1
    return {"suite": suite, "summary": counts, "checks": [r.model_dump(mode="python") for r in reports]}


def _functional_columns(frame: pd.DataFrame) -> List[str]:
    skip = set(LEADING_COLUMNS) | {"min_u", "max_u", "l1_u"}
    return [c for c in frame.columns if c not in skip and ":" not in c and not c.startswith("window")]


def write_plots(out_dir: Path, traj: Trajectory, t_offset: Optional[float] = None) -> Path:
    """Norms against time, functionals against time and a waterfall of u snapshots."""
    path = _prepare(Path(out_dir) / PLOT_FILE)
    frame = series_frame(traj, t_offset)
    fig, axes = plt.subplots(3, 1, figsize=(8, 11))
    try:
        ax = axes[0]
        for col in ("Iu", "Energy", "Hm", "l1_u", "max_slope"):
            if col in frame.columns:
                ax.plot(frame["t_phys"], frame[col], label=col)
        for col in frame.columns:
            if col.startswith("window:") or col.endswith(":norm"):
                ax.plot(frame["t_phys"], frame[col], label=col, linestyle="--")
        ax.set_title("Norms")
        ax.set_xlabel("t")
        ax.legend(fontsize="small")

        ax = axes[1]
        columns = _functional_columns(frame)
        for col in columns:
            ax.plot(frame["t_phys"], frame[col], label=col)
        ax.set_title("Functionals")
        ax.set_xlabel("t")
        if columns:
            ax.legend(fontsize="small")

        ax = axes[2]
        states = traj.snapshots
        peak = max((s.u.max_abs() for _, s in states), default=0.0) or 1.0
        offset = peak / max(1, len(states) - 1) * 2.0
        for i, (t, state) in enumerate(states):
            ax.plot(state.grid.nodes, state.u.values + i * offset, color="black", linewidth=0.6)
        ax.set_title("u snapshots")
        ax.set_xlabel("x")
        ax.set_yticks([])

        fig.tight_layout()
        fig.savefig(path, format="svg")
    finally:
        plt.close(fig)
    logger.info("Wrote plots to %s", path)
    return path


def write_sweep_table(path: Path, rows: Sequence[Mapping[str, Any]]) -> Path:
    path = _prepare(Path(path))
    frame = pd.DataFrame(list(rows))
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\r\n")
    logger.info("Wrote %d sweep rows to %s", len(frame), path)
    return path
