"""CSV time series and binary field snapshots."""

import csv
import json
import os
from dataclasses import dataclass

import numpy as np

from ..diagnostics import DiagnosticsRecord
from ..errors import IoError
from ..field import Grid, ScalarField

COLUMNS = DiagnosticsRecord.columns()


def _ensure_parent(path):
    d = os.path.dirname(os.fspath(path))
    if d:
        os.makedirs(d, exist_ok=True)


def write_csv(records, path):
    """Full-precision CSV (repr of each float) in the fixed column order."""
    try:
        _ensure_parent(path)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(COLUMNS)
            for r in records:
                w.writerow([repr(float(v)) for v in r.values()])
    except OSError as e:
        raise IoError(path, e.strerror or str(e)) from None


def read_csv(path):
    """Rows as dicts of floats."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as e:
        raise IoError(path, e.strerror or str(e)) from None
    return [{k: float(v) for k, v in row.items()} for row in rows]


def records_from_csv(path):
    out = []
    for row in read_csv(path):
        vals = [row[c] for c in COLUMNS]
        out.append(DiagnosticsRecord(*vals))
    return out


@dataclass
class Snapshot:
    header: dict
    field: ScalarField


def write_snapshot(path, phi: ScalarField, **meta):
    """One JSON header line, then the values as little-endian float64, row-major."""
    g = phi.grid
    header = {"dim": g.dim, "n": g.n, "count": g.size, "dtype": "<f8"}
    header.update(meta)
    line = json.dumps(header, sort_keys=True, allow_nan=True)
    if "\n" in line:
        raise ValueError("header must fit on one line")
    try:
        _ensure_parent(path)
        with open(path, "wb") as fh:
            fh.write(line.encode("ascii") + b"\n")
            fh.write(np.ascontiguousarray(phi.values, dtype="<f8").tobytes(order="C"))
    except OSError as e:
        raise IoError(path, e.strerror or str(e)) from None


def read_snapshot(path) -> Snapshot:
    try:
        with open(path, "rb") as fh:
            line = fh.readline()
            payload = fh.read()
    except OSError as e:
        raise IoError(path, e.strerror or str(e)) from None
    try:
        header = json.loads(line.decode("ascii"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise IoError(path, f"bad snapshot header: {e}") from None
    g = Grid(int(header["dim"]), int(header["n"]))
    if len(payload) != 8 * g.size:
        raise IoError(path, f"payload has {len(payload)} bytes, expected {8 * g.size}")
    vals = np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(g.shape)
    return Snapshot(header, ScalarField(g, vals))


def write_json(path, obj):
    try:
        _ensure_parent(path)
        with open(path, "w") as fh:
            json.dump(obj, fh, indent=1, sort_keys=True, default=_jsonable)
            fh.write("\n")
    except OSError as e:
        raise IoError(path, e.strerror or str(e)) from None


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)
