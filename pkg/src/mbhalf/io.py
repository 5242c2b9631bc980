"""Deterministic CSV / JSON export for solutions and tables."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .core import LinearSolution, SolutionField


def fmt(v):
    """Shortest round-tripping text for numbers; complex as a+bj; None as empty."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (complex, np.complexfloating)):
        return f"{float(v.real)!r}{float(v.imag):+.17g}j"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path):
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj) if np.isfinite(obj) else str(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if obj is None or isinstance(obj, (int, str)):
        return obj
    return str(obj)


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _fields(sol):
    if isinstance(sol, SolutionField):
        return {"u": sol.u, "v": sol.v}
    if isinstance(sol, LinearSolution):
        return {"value": sol.values}
    raise TypeError("expected a SolutionField or LinearSolution")


def emit_plotdata(sol, kind: str, out_dir, *, prefix="solution", t_index=0, alpha=None):
    """Write plotting CSVs and return the paths.

    snapshot   columns x, <fields> at time index ``t_index``
    waterfall  one file per field, one row per time: t, value at each x
    conserved  t, mass_u, mass_v, E, H (SolutionField only; needs alpha)
    """
    out_dir = Path(out_dir)
    fields = _fields(sol)
    if kind == "snapshot":
        names = list(fields)
        rows = zip(sol.x, *(fields[n][:, t_index] for n in names))
        return [write_csv(out_dir / f"{prefix}_snapshot.csv", ["x", *names], rows)]
    if kind == "waterfall":
        paths = []
        for name, vals in fields.items():
            header = ["t", *(f"x={fmt(x)}" for x in sol.x)]
            rows = ([t, *vals[:, j]] for j, t in enumerate(sol.t))
            paths.append(write_csv(out_dir / f"{prefix}_{name}_waterfall.csv", header, rows))
        return paths
    if kind == "conserved":
        from .nonlinear import conserved_quantities

        if not isinstance(sol, SolutionField):
            raise TypeError("conserved quantities need both components")
        alpha = alpha if alpha is not None else sol.meta.get("alpha")
        if alpha is None:
            raise ValueError("alpha is required for the Hamiltonian")
        q = conserved_quantities(sol, alpha)
        cols = ["t", "mass_u", "mass_v", "E", "H"]
        return [write_csv(out_dir / f"{prefix}_conserved.csv", cols, zip(*(q[c] for c in cols)))]
    raise ValueError(f"unknown plot kind {kind!r}")
