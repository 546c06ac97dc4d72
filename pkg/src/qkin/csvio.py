"""CSV readers and writers for truth, IMU, fix and state-trace files.

Every file starts with ``# key=value`` lines that echo the configuration that
produced it, followed by one column-header line and the data. Floats are
written with 17 significant digits so that doubles round-trip exactly.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .eskf import ImuSample, NominalState
from .sim import FixSample, GroundTruth

IMU_COLUMNS = ("t", "ax", "ay", "az", "wx", "wy", "wz")
TRUTH_COLUMNS = ("t", "px", "py", "pz", "vx", "vy", "vz", "qw", "qx", "qy", "qz")
FIX_COLUMNS = ("t", "zx", "zy", "zz")
TRACE_COLUMNS = (
    ("t", "px", "py", "pz", "vx", "vy", "vz", "qw", "qx", "qy", "qz")
    + ("abx", "aby", "abz", "wbx", "wby", "wbz", "gx", "gy", "gz")
    + tuple(
        f"std_{blk}{ax}"
        for blk in ("p", "v", "th", "ab", "wb", "g")
        for ax in "xyz"
    )
)


class SchemaError(ValueError):
    """A CSV file does not have the expected columns."""

    def __init__(self, path, message: str, column: str | None = None):
        super().__init__(f"{path}: {message}")
        self.column = column


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write(path, columns, rows: Iterable, header: Mapping[str, object] | None):
    path = Path(path)
    with path.open("w", newline="") as fh:
        for k, v in (header or {}).items():
            fh.write(f"# {k}={v}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(fmt(x) for x in row) + "\n")


def _read(path, columns) -> tuple[np.ndarray, dict]:
    path = Path(path)
    meta = {}
    with path.open(newline="") as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key.strip()] = value.strip()
        elif line.strip():
            body.append(line)
    if not body:
        raise SchemaError(path, "missing column header", columns[0])
    got = [c.strip() for c in next(csv.reader([body[0]]))]
    for i, want in enumerate(columns):
        if i >= len(got):
            raise SchemaError(path, f"missing column '{want}'", want)
        if got[i] != want:
            raise SchemaError(path, f"column {i + 1} is '{got[i]}', expected '{want}'", want)
    if len(got) > len(columns):
        extra = got[len(columns)]
        raise SchemaError(path, f"unexpected column '{extra}'", extra)
    data = np.empty((len(body) - 1, len(columns)))
    for r, line in enumerate(body[1:]):
        fields = line.split(",")
        if len(fields) != len(columns):
            raise SchemaError(path, f"row {r + 1} has {len(fields)} fields, expected {len(columns)}")
        try:
            data[r] = [float(f) for f in fields]
        except ValueError as exc:
            raise SchemaError(path, f"row {r + 1}: {exc}") from exc
    return data, meta


def write_imu(path, samples, header=None):
    _write(path, IMU_COLUMNS, ([u.t, *u.acc, *u.gyro] for u in samples), header)


def read_imu(path) -> list[ImuSample]:
    d, _ = _read(path, IMU_COLUMNS)
    return [ImuSample(float(r[0]), r[1:4].copy(), r[4:7].copy()) for r in d]


def write_truth(path, truth: GroundTruth, header=None):
    rows = (
        [truth.t[i], *truth.p[i], *truth.v[i], *truth.q[i]] for i in range(len(truth))
    )
    _write(path, TRUTH_COLUMNS, rows, header)


def read_truth(path) -> GroundTruth:
    """Truth from CSV; the acceleration and body rate are not stored and come back as NaN."""
    d, _ = _read(path, TRUTH_COLUMNS)
    nan = np.full((len(d), 3), np.nan)
    return GroundTruth(d[:, 0].copy(), d[:, 1:4].copy(), d[:, 4:7].copy(), d[:, 7:11].copy(), nan, nan.copy())


def write_fixes(path, fixes, header=None):
    _write(path, FIX_COLUMNS, ([f.t, *f.z] for f in fixes), header)


def read_fixes(path, sigma: float) -> list[FixSample]:
    """Fixes from CSV; ``sigma`` applies unless the header records ``sigma_fix``."""
    d, meta = _read(path, FIX_COLUMNS)
    if "sigma_fix" in meta:
        sigma = float(meta["sigma_fix"])
    return [FixSample(float(r[0]), r[1:4].copy(), sigma) for r in d]


def write_trace(path, times, states: list[NominalState], stds: np.ndarray, header=None):
    rows = (
        [t, *x.p, *x.v, *x.q, *x.a_b, *x.w_b, *x.g, *s]
        for t, x, s in zip(times, states, stds)
    )
    _write(path, TRACE_COLUMNS, rows, header)


def read_trace(path) -> np.ndarray:
    d, _ = _read(path, TRACE_COLUMNS)
    return d
