"""CSV and text emitters for trajectories, convergence tables and reports.

Files are first written as ``<name>.partial`` and renamed on success, so a
failed run never leaves a truncated file under the final name.
"""

from __future__ import annotations

import contextlib
import csv
import math
import os
from pathlib import Path

import numpy as np

from .energy import EnergyBreakdown
from .fem import with_boundary
from .verification import ERROR_NAMES, ConvergenceReport

TIMESERIES_HEADER = ("t", "E_total", "E_kinetic", "E_accel", "E_elastic", "E_velgrad",
                     "E_porousgrad", "E_coupled", "E_thermal", "neg_log_E", "dissipation")
FIELD_HEADER = ("t", "x", "value")
FIELDS = ("u", "phi", "w")


def fmt(x: float) -> str:
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else format(float(x), ".17g")


@contextlib.contextmanager
def atomic_writer(path):
    path = Path(path)
    tmp = path.with_name(path.name + ".partial")
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        yield fh
    os.replace(tmp, path)


def _energy_row(t: float, e: EnergyBreakdown, residual) -> list[str]:
    total = e.total
    neg_log = -math.log(total) if total > 0 else None
    return [fmt(t), fmt(total), fmt(e.kinetic), fmt(e.accel), fmt(e.elastic), fmt(e.vel_grad),
            fmt(e.porous_grad), fmt(e.coupled), fmt(e.thermal), fmt(neg_log), fmt(residual)]


def write_timeseries_csv(traj, path) -> Path:
    """One row per recorded level, from n = 2, in increasing time.

    ``dissipation`` is the step residual (E_n - E_{n-1})/dt + kappa||w_x||^2
    + k||w||^2, left empty at the first level.
    """
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    E = traj.total_energy
    with atomic_writer(path) as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(TIMESERIES_HEADER)
        for n in traj.frame_steps:
            i = int(n - traj.steps[0])
            residual = None
            if i > 0:
                residual = (E[i] - E[i - 1]) / traj.dt + traj.dissipation_rate[i]
            out.writerow(_energy_row(traj.times[i], traj.energies[i], residual))
    return Path(path)


def write_field_csv(traj, field: str, path) -> Path:
    """Rows (t, x, value) ordered by time then position, boundary nodes included."""
    if field not in FIELDS:
        raise ValueError(f"unknown field {field!r}; expected one of {FIELDS}")
    frames = getattr(traj, field)
    x = traj.mesh.nodes
    with atomic_writer(path) as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(FIELD_HEADER)
        for t, values in zip(traj.frame_times, frames):
            t_s = fmt(t)
            for xi, v in zip(x, with_boundary(values)):
                out.writerow([t_s, fmt(xi), fmt(v)])
    return Path(path)


def read_timeseries_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """(t, E_total) columns of a file written by :func:`write_timeseries_csv`."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0][:2]) != ("t", "E_total"):
        raise ValueError(f"{path}: not an energy time series (header {rows[0] if rows else None})")
    data = np.array([[float(r[0]), float(r[1])] for r in rows[1:] if r])
    if data.size == 0:
        raise ValueError(f"{path}: no data rows")
    return data[:, 0], data[:, 1]


def write_rates_csv(report: ConvergenceReport, path) -> Path:
    """Per-level error table, then one footer row of fitted orders per sweep."""
    with atomic_writer(path) as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(("sweep", "level", "s", "h", "dt") + ERROR_NAMES)
        for row in report.rows():
            out.writerow([row[0], row[1], row[2], fmt(row[3]), fmt(row[4])] + [fmt(v) for v in row[5:]])
        out.writerow(["order_h", "", "", "", ""] + [fmt(report.order_h[k]) for k in ERROR_NAMES])
        out.writerow(["order_dt", "", "", "", ""] + [fmt(report.order_dt[k]) for k in ERROR_NAMES])
    return Path(path)


def write_report(path, sections: dict[str, dict]) -> Path:
    """Plain ``key = value`` report grouped under ``[section]`` headings."""
    with atomic_writer(path) as fh:
        for title, entries in sections.items():
            fh.write(f"[{title}]\n")
            for k, v in entries.items():
                if isinstance(v, float):
                    v = fmt(v)
                elif isinstance(v, tuple):
                    v = ", ".join(fmt(x) for x in v)
                fh.write(f"{k} = {v}\n")
            fh.write("\n")
    return Path(path)
