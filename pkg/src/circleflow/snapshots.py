"""Snapshot files: CSV samples (x, u, phi, v, m) plus a JSON sidecar.

The sidecar stores the half-spectrum coefficients, so a snapshot can be
re-synthesized exactly. Floats are written with 17 significant digits.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .spectral import GridSpec, PeriodicField

CONVENTION = "period 2π, factor i"
COLUMNS = ("x", "u", "phi", "v", "m")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def encode_field(u: PeriodicField) -> list:
    return [[float(c.real), float(c.imag)] for c in u.half]


def decode_field(grid: GridSpec, data) -> PeriodicField:
    arr = np.asarray(data, dtype=np.float64)
    if arr.shape != (grid.kmax + 1, 2):
        raise ConfigurationError(f"coefficient block has shape {arr.shape}, expected ({grid.kmax + 1}, 2)")
    return PeriodicField(grid, arr[:, 0] + 1j * arr[:, 1])


def write_json(path: Path, payload: dict):
    path.write_text(json.dumps(payload, indent=2, ensure_ascii=False, sort_keys=True) + "\n",
                    encoding="utf-8")


def write_snapshot(stem: Path, t: float, u: PeriodicField, phi_disp: PeriodicField,
                   v: PeriodicField, m: PeriodicField, operator: dict):
    """Write ``stem.csv`` and ``stem.json``. phi is stored as x + displacement."""
    grid = u.grid
    x = grid.nodes
    cols = [x, u.samples(), x + phi_disp.samples(), v.samples(), m.samples()]
    stem.parent.mkdir(parents=True, exist_ok=True)
    with open(stem.with_suffix(".csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for row in zip(*cols):
            w.writerow([fmt(val) for val in row])
    write_json(stem.with_suffix(".json"), {
        "time": float(t),
        "grid": {"n_points": grid.n_points},
        "operator": operator,
        "convention": CONVENTION,
        "columns": list(COLUMNS),
        "coefficients": {"u": encode_field(u), "phi_displacement": encode_field(phi_disp),
                         "v": encode_field(v), "m": encode_field(m)},
    })


def read_snapshot(path) -> dict:
    """Load a snapshot sidecar (``.json``) into fields; returns time, grid and fields."""
    path = Path(path).with_suffix(".json")
    if not path.exists():
        raise ConfigurationError(f"snapshot {path} does not exist")
    meta = json.loads(path.read_text(encoding="utf-8"))
    grid = GridSpec(int(meta["grid"]["n_points"]))
    fields = {k: decode_field(grid, v) for k, v in meta["coefficients"].items()}
    return {"time": meta.get("time", 0.0), "grid": grid, "fields": fields, "meta": meta}


def read_csv_columns(path) -> dict:
    path = Path(path).with_suffix(".csv")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], np.array(rows[1:], dtype=np.float64)
    return {name: body[:, j] for j, name in enumerate(header)}


def write_diffeo(stem: Path, disp: PeriodicField, operator: dict, extra: dict | None = None):
    """Diffeomorphism file: CSV (x, phi) and a sidecar with the displacement coefficients."""
    grid = disp.grid
    x = grid.nodes
    stem.parent.mkdir(parents=True, exist_ok=True)
    with open(stem.with_suffix(".csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("x", "phi"))
        for xi, pi in zip(x, x + disp.samples()):
            w.writerow([fmt(xi), fmt(pi)])
    payload = {"kind": "diffeo", "grid": {"n_points": grid.n_points}, "operator": operator,
               "convention": CONVENTION,
               "coefficients": {"phi_displacement": encode_field(disp)}}
    payload.update(extra or {})
    write_json(stem.with_suffix(".json"), payload)


def write_field(stem: Path, u: PeriodicField, operator: dict, extra: dict | None = None):
    """Velocity-field file: CSV (x, v) and a sidecar with its coefficients."""
    grid = u.grid
    stem.parent.mkdir(parents=True, exist_ok=True)
    with open(stem.with_suffix(".csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("x", "v"))
        for xi, vi in zip(grid.nodes, u.samples()):
            w.writerow([fmt(xi), fmt(vi)])
    payload = {"kind": "field", "grid": {"n_points": grid.n_points}, "operator": operator,
               "convention": CONVENTION, "coefficients": {"v": encode_field(u)}}
    payload.update(extra or {})
    write_json(stem.with_suffix(".json"), payload)
