"""Trajectory and table persistence.

Trajectory files are a short ASCII header followed by raw little-endian
float64 data::

    EPKDV-TRAJ 1
    n_points 512
    length_L 100.0
    x_min -50.0
    n_times 21
    fields n1 n2 ...
    meta {"eps": 0.1}
    END

then ``times`` (n_times values) and each field as an (n_times, n_points)
block in header order. Tables are RFC-4180 CSV.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from ..errors import ShapeError
from ..params_grid import Grid

__all__ = ["write_trajectory", "read_trajectory", "write_csv", "read_csv", "format_value"]

MAGIC = "EPKDV-TRAJ 1"


def write_trajectory(path, times, fields: dict, grid: Grid, meta: dict | None = None) -> Path:
    path = Path(path)
    times = np.asarray(times, dtype="<f8")
    nt = times.shape[0]
    for name, arr in fields.items():
        if " " in name or not name:
            raise ShapeError(f"invalid field name {name!r}")
        if np.shape(arr) != (nt, grid.n_points):
            raise ShapeError(f"field {name!r} has shape {np.shape(arr)}, expected {(nt, grid.n_points)}")
    header = [
        MAGIC,
        f"n_points {grid.n_points}",
        f"length_L {grid.length_L!r}",
        f"x_min {grid.x_min!r}",
        f"n_times {nt}",
        "fields " + " ".join(fields),
        "meta " + json.dumps(meta or {}, sort_keys=True, default=float),
        "END",
    ]
    with path.open("wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        fh.write(times.tobytes())
        for arr in fields.values():
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    return path


def read_trajectory(path):
    """Return ``(times, fields, grid, meta)``."""
    path = Path(path)
    with path.open("rb") as fh:
        head = {}
        first = fh.readline().decode("ascii").rstrip("\n")
        if first != MAGIC:
            raise ShapeError(f"{path} is not a trajectory file")
        while True:
            line = fh.readline()
            if not line:
                raise ShapeError(f"{path}: header not terminated")
            line = line.decode("ascii").rstrip("\n")
            if line == "END":
                break
            key, _, val = line.partition(" ")
            head[key] = val
        N, nt = int(head["n_points"]), int(head["n_times"])
        names = head["fields"].split()
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != nt * (1 + N * len(names)):
        raise ShapeError(f"{path}: payload has {data.size} values, header implies {nt * (1 + N * len(names))}")
    grid = Grid(N, float(head["length_L"]), float(head["x_min"]))
    times = data[:nt].copy()
    fields, off = {}, nt
    for name in names:
        fields[name] = data[off : off + nt * N].reshape(nt, N).copy()
        off += nt * N
    return times, fields, grid, json.loads(head["meta"])


def format_value(v) -> str:
    """Deterministic text for a table cell (shortest round-trip repr for floats)."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if v is None:
        return ""
    return str(v)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_value(v) for v in row])
    return path


def read_csv(path) -> tuple[list, list]:
    with Path(path).open(newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [row for row in r]
    return header, rows
