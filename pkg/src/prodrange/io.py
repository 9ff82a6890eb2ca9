"""File formats: matrix JSON, report JSON, CSV exports."""

from __future__ import annotations

import csv
import io as _io
import json
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, ParseError
from .linalg import ComplexMatrix
from .regions import region_from_json


def matrix_to_json(x: ComplexMatrix) -> dict:
    flat = x.data.ravel()
    return {"dims": list(x.dims), "entries": [[float(z.real), float(z.imag)] for z in flat]}


def matrix_from_json(obj, path: str = "<matrix>") -> ComplexMatrix:
    """Parse ``{"dims": [m1, ...], "entries": [[re, im], ...]}`` (row-major)."""
    if not isinstance(obj, dict) or "dims" not in obj or "entries" not in obj:
        raise ParseError(path, "matrix JSON needs keys 'dims' and 'entries'")
    try:
        dims = tuple(int(d) for d in obj["dims"])
        ent = np.array(obj["entries"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(path, f"bad matrix field: {exc}") from exc
    if ent.ndim != 2 or ent.shape[1] != 2:
        raise ParseError(path, "entries must be a list of [re, im] pairs")
    if not np.all(np.isfinite(ent)):
        raise ParseError(path, "entries must be finite")
    n = int(np.prod(dims)) if dims else 0
    if ent.shape[0] != n * n:
        raise ParseError(path, f"dims {list(dims)} need {n * n} entries, got {ent.shape[0]}")
    try:
        return ComplexMatrix(dims, (ent[:, 0] + 1j * ent[:, 1]).reshape(n, n))
    except DimensionMismatch as exc:
        raise ParseError(path, str(exc)) from exc


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParseError(str(path), str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(str(path), f"invalid JSON: {exc}") from exc


def load_matrix(path) -> ComplexMatrix:
    return matrix_from_json(_read_json(path), str(path))


def load_region(path):
    obj = _read_json(path)
    if not isinstance(obj, dict):
        raise ParseError(str(path), "region JSON must be an object")
    return region_from_json(obj, str(path))


def save_matrix(x: ComplexMatrix, path) -> None:
    write_json(matrix_to_json(x), path)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, shortest round-trip floats)."""
    return json.dumps(_clean(obj), sort_keys=True, separators=(",", ":")) + "\n"


def write_json(obj, path) -> None:
    Path(path).write_text(dumps(obj))


def cloud_csv(points) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["re", "im"])
    for z in np.asarray(points, dtype=complex):
        w.writerow([repr(float(z.real)), repr(float(z.imag))])
    return buf.getvalue()


def boundary_csv(boundary) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["theta", "support", "re", "im"])
    for t, s, z in zip(boundary.thetas, boundary.support, boundary.points):
        w.writerow([repr(float(t)), repr(float(s)), repr(float(z.real)), repr(float(z.imag))])
    return buf.getvalue()
