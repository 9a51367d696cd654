"""Readers for algebra, metric, tensor and point files."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .connections import TriTensor
from .cs_metrics import MetricAtUnit
from .errors import CartanGeoError
from .lie_core import (
    HTypeSpec,
    LieAlgebraSpec,
    OscillatorSpec,
    make_heisenberg,
    make_htype,
    make_oscillator,
    make_semidirect,
)

__all__ = [
    "InputError",
    "algebra_from_dict",
    "load_algebra",
    "load_json",
    "load_metric",
    "load_points",
    "load_tensor",
]


class InputError(CartanGeoError, ValueError):
    """Input file is missing, unparsable or structurally wrong."""


def load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc.msg} at line {exc.lineno}") from exc


def _raw_constants(dim: int, entries) -> np.ndarray:
    c = np.zeros((dim, dim, dim))
    for e in entries:
        i, j, k, v = int(e["i"]) - 1, int(e["j"]) - 1, int(e["k"]) - 1, float(e["value"])
        if not (0 <= i < dim and 0 <= j < dim and 0 <= k < dim):
            raise InputError(f"structure constant index out of range: {e}")
        if i == j and v != 0.0:
            raise InputError(f"[e_{i + 1}, e_{i + 1}] must vanish")
        c[i, j, k] = v
        c[j, i, k] = -v
    return c


def algebra_from_dict(spec: dict) -> tuple[LieAlgebraSpec, HTypeSpec | None]:
    """Build an algebra from its JSON description.

    Kinds: ``heisenberg {n}``, ``htype {n, m, gamma}``, ``oscillator
    {lambda}``, ``semidirect {D}``, ``raw {dim, constants}``. Index entries
    are 1-based and completed antisymmetrically.
    """
    try:
        kind = spec["kind"]
        if kind == "heisenberg":
            return make_heisenberg(int(spec["n"])), None
        if kind == "htype":
            h = HTypeSpec.from_entries(int(spec["n"]), int(spec["m"]), spec.get("gamma", []))
            return make_htype(h), h
        if kind == "oscillator":
            return make_oscillator(OscillatorSpec(spec["lambda"])), None
        if kind == "semidirect":
            return make_semidirect(spec["D"]), None
        if kind == "raw":
            dim = int(spec["dim"])
            return LieAlgebraSpec(_raw_constants(dim, spec.get("constants", []))), None
    except (KeyError, TypeError, IndexError) as exc:
        raise InputError(f"malformed algebra spec: missing or invalid field {exc}") from exc
    raise InputError(f"unknown algebra kind {spec.get('kind')!r}")


def load_algebra(path) -> tuple[LieAlgebraSpec, HTypeSpec | None]:
    return algebra_from_dict(load_json(path))


def load_metric(path) -> MetricAtUnit:
    data = load_json(path)
    if "matrix" not in data:
        raise InputError(f"{path}: metric file needs a 'matrix' field")
    return MetricAtUnit(np.asarray(data["matrix"], dtype=float))


def load_tensor(path, dim: int | None = None) -> TriTensor:
    """Totally symmetric tensor from ``{"entries": [[[...]]]}`` or 1-based ``{"components": [...]}``.

    Listed components are copied to every index permutation.
    """
    data = load_json(path)
    if "entries" in data:
        return TriTensor(np.asarray(data["entries"], dtype=float))
    if "components" in data:
        d = int(data.get("dim", dim or 0))
        if d <= 0:
            raise InputError(f"{path}: tensor components need 'dim'")
        s = np.zeros((d, d, d))
        for e in data["components"]:
            idx = (int(e["i"]) - 1, int(e["j"]) - 1, int(e["k"]) - 1)
            for perm in {(idx[a], idx[b], idx[c]) for a, b, c in [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]}:
                s[perm] = float(e["value"])
        return TriTensor(s)
    raise InputError(f"{path}: tensor file needs 'entries' or 'components'")


def load_points(path, dim: int | None = None) -> np.ndarray:
    """Rows of floats from a CSV file; a non-numeric first row is treated as a header."""
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(cell.strip() for cell in r)]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if rows:
        try:
            [float(c) for c in rows[0]]
        except ValueError:
            rows = rows[1:]
    if not rows:
        raise InputError(f"{path} holds no data rows")
    try:
        pts = np.array([[float(c) for c in r] for r in rows])
    except ValueError as exc:
        raise InputError(f"{path}: non-numeric entry ({exc})") from exc
    if dim is not None and pts.shape[1] != dim:
        raise InputError(f"{path}: rows have {pts.shape[1]} columns, expected {dim}")
    return pts
