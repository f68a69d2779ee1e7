"""CSV/JSON writers shared by the command-line tool."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .dynamics import PopulationRecord, Trajectory

__all__ = ["fmt", "write_csv", "write_json", "read_csv", "trajectory_rows", "to_jsonable"]


def fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path, rows, header=None) -> Path:
    rows = list(rows)
    if header is None:
        header = list(rows[0]) if rows else []
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(row[h]) for h in header])
    return path


def _as_float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        return float("nan")


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Header and a float array; non-numeric cells (e.g. empty error notes) read as NaN."""
    with Path(path).open() as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[_as_float(v) for v in row] for row in reader])
    return header, data


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj


def write_json(path, payload) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_jsonable(payload), indent=2, sort_keys=True) + "\n")
    return path


def trajectory_rows(traj: Trajectory, record: PopulationRecord):
    """Rows with t, Re/Im of every amplitude, P_0..P_{N-1} and P_leak."""
    n = traj.states.shape[1]
    header = ["t"]
    header += [f"{part}_{j}" for j in range(n) for part in ("re", "im")]
    header += [f"P_{j}" for j in range(n)] + ["P_leak"]
    rows = []
    for k, t in enumerate(traj.times):
        row = {"t": t}
        for j in range(n):
            row[f"re_{j}"] = traj.states[k, j].real
            row[f"im_{j}"] = traj.states[k, j].imag
            row[f"P_{j}"] = record.populations[k, j]
        row["P_leak"] = record.leakage[k]
        rows.append(row)
    return header, rows
