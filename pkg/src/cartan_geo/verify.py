"""Randomized invariant suite behind the ``verify`` command.

Every check draws from its own generator seeded by ``(seed, index)``, so
reports do not depend on how many workers run them.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .connections import canonical_connection, curvature, torsion
from .cs_metrics import (
    MetricAtUnit,
    MetricField,
    check_cs_condition,
    heisenberg_geodesic,
    heisenberg_metric_coeffs,
    levi_civita_frame,
    metric_field_2nil,
    metric_field_series,
    parallelism_residual,
    signature,
    solve_cs_space,
)
from .errors import DegenerateMetricError
from .lie_core import (
    Chart,
    GroupPoint,
    LieAlgebraSpec,
    bracket,
    exp_chart,
    group_inverse,
    group_product,
    jacobi_residual,
    log_chart,
)
from .mean import Dataset, barycenter_fixed_point

__all__ = ["CheckResult", "default_metric", "run_suite", "worker_count"]

THREADS_ENV = "CARTAN_GEO_THREADS"


@dataclass(frozen=True)
class CheckResult:
    name: str
    paper_anchor: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tolerance)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "paper_anchor": self.paper_anchor,
            "residual": float(self.residual),
            "tolerance": float(self.tolerance),
            "pass": self.passed,
        }


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def default_metric(alg: LieAlgebraSpec, seed: int = 0) -> MetricAtUnit:
    """Random nondegenerate member of the algebra's Cartan-Schouten space."""
    rng = np.random.default_rng([seed, 99])
    space = solve_cs_space(alg)
    for _ in range(100):
        m = space.combine(rng.standard_normal(space.dimension))
        try:
            return MetricAtUnit(m)
        except DegenerateMetricError:
            continue
    raise DegenerateMetricError("no nondegenerate Cartan-Schouten metric found")


def _points(rng, dim, count, scale=0.7):
    return [scale * rng.standard_normal(dim) for _ in range(count)]


def _jacobi(alg, g, rng):
    return jacobi_residual(alg)


def _cs(alg, g, rng):
    return check_cs_condition(alg, g)


def _torsion(alg, g, rng):
    return float(np.max(np.abs(torsion(canonical_connection(alg), alg))))


def _canonical_curvature(alg, g, rng):
    r = curvature(canonical_connection(alg), alg)
    expected = -0.25 * np.einsum("ijm,mkl->ijkl", alg.C, alg.C)
    return float(np.max(np.abs(r - expected)))


def _skew_curvature(alg, g, rng):
    low = np.einsum("ijkl,lv->ijkv", curvature(canonical_connection(alg), alg), g.matrix)
    return float(np.max(np.abs(low + low.transpose(0, 1, 3, 2))))


def _bch(alg, g, rng):
    worst = 0.0
    for a, b in zip(_points(rng, alg.dim, 20), _points(rng, alg.dim, 20)):
        ab = group_product(alg, GroupPoint(Chart.EXPONENTIAL, a), GroupPoint(Chart.EXPONENTIAL, b))
        worst = max(worst, float(np.max(np.abs(ab.coords - (a + b + 0.5 * bracket(alg, a, b))))))
    return worst


def _associativity(alg, g, rng):
    worst = 0.0
    pts = [GroupPoint(Chart.EXPONENTIAL, p) for p in _points(rng, alg.dim, 60)]
    for a, b, c in zip(pts[0::3], pts[1::3], pts[2::3]):
        left = group_product(alg, group_product(alg, a, b), c)
        right = group_product(alg, a, group_product(alg, b, c))
        worst = max(worst, float(np.max(np.abs(left.coords - right.coords))))
    return worst


def _commutator(alg, g, rng):
    worst = 0.0
    for a, b in zip(_points(rng, alg.dim, 20), _points(rng, alg.dim, 20)):
        pa, pb = GroupPoint(Chart.EXPONENTIAL, a), GroupPoint(Chart.EXPONENTIAL, b)
        c = group_product(alg, group_product(alg, pa, pb), group_product(alg, group_inverse(alg, pa), group_inverse(alg, pb)))
        worst = max(worst, float(np.max(np.abs(c.coords - bracket(alg, a, b)))))
    return worst


def _parallelism(alg, g, rng):
    field = MetricField(alg, g)
    eye = np.eye(alg.dim)
    worst = 0.0
    for sigma in _points(rng, alg.dim, 5):
        for x in eye:
            for y in eye:
                for z in eye:
                    worst = max(worst, abs(parallelism_residual(field, sigma, x, y, z)))
    return worst


def _levi_civita(alg, g, rng):
    field = MetricField(alg, g)
    return max(float(np.max(np.abs(levi_civita_frame(field, s) - 0.5 * alg.C))) for s in _points(rng, alg.dim, 10))


def _flatness(alg, g, rng):
    return float(np.max(np.abs(curvature(canonical_connection(alg), alg))))


def _series(alg, g, rng):
    eye = np.eye(alg.dim)
    worst = 0.0
    for s in _points(rng, alg.dim, 5, scale=0.5):
        for x in eye:
            for y in eye:
                worst = max(worst, abs(metric_field_series(alg, g, s, x, y, 2) - metric_field_2nil(alg, g, s, x, y)))
    return worst


def _heisenberg_table(alg, g, rng):
    field = MetricField(alg, g)
    n = alg.params["n"]
    worst = 0.0
    for q in _points(rng, alg.dim, 20, scale=1.0):
        pt = GroupPoint(Chart.HEISENBERG, q)
        worst = max(worst, float(np.max(np.abs(field.coordinates(pt) - heisenberg_metric_coeffs(n, g, q)))))
    return worst


def _signature(alg, g, rng):
    field = MetricField(alg, g)
    target = g.signature
    bad = sum(signature(field.coordinates(s)) != target for s in _points(rng, alg.dim, 20))
    return float(bad)


def _mean_certificate(alg, g, rng):
    data = Dataset(rng.standard_normal((50, alg.dim)), Chart.EXPONENTIAL)
    return barycenter_fixed_point(alg, data).residual


def _mean_iterations(alg, g, rng):
    data = Dataset(rng.standard_normal((50, alg.dim)), Chart.EXPONENTIAL)
    return float(barycenter_fixed_point(alg, data).iterations)


def _geodesic(alg, g, rng):
    field = MetricField(alg, g)
    v = rng.standard_normal(alg.dim)
    ts, path = heisenberg_geodesic(field, v)
    return float(np.max(np.abs(path - ts[:, None] * v)))


def _chart_roundtrip(alg, g, rng):
    worst = 0.0
    for v in _points(rng, alg.dim, 50, scale=1.0):
        pt = exp_chart(alg, v, Chart.HEISENBERG)
        worst = max(worst, float(np.max(np.abs(log_chart(alg, pt) - v))))
    return worst


Check = tuple[str, str, float, Callable]

COMMON: list[Check] = [
    ("jacobi", "Jacobi identity", 1e-12, _jacobi),
    ("cs-condition", "skew-adjoint action of the derived ideal", 1e-10, _cs),
    ("canonical-torsion", "torsion-free canonical connection", 1e-13, _torsion),
    ("canonical-curvature", "canonical curvature R(x,y)z = -1/4 [[x,y],z]", 1e-12, _canonical_curvature),
    ("skew-curvature", "curvature is skew for a parallel metric", 1e-12, _skew_curvature),
]

TWO_STEP: list[Check] = [
    ("bch", "BCH group law for class 2", 1e-14, _bch),
    ("associativity", "group associativity", 1e-12, _associativity),
    ("commutator", "group commutator equals bracket", 1e-13, _commutator),
    ("parallelism", "metric parallel for the canonical connection", 1e-12, _parallelism),
    ("levi-civita", "Levi-Civita connection equals canonical connection", 1e-10, _levi_civita),
    ("flatness", "canonical connection flat on 2-step groups", 1e-13, _flatness),
    ("series-agreement", "metric series truncates after the linear term", 1e-13, _series),
    ("signature", "metric field congruent to the unit metric", 0.0, _signature),
    ("mean-certificate", "biinvariant barycenter equation", 1e-12, _mean_certificate),
    ("mean-iterations", "one-step barycenter convergence", 2.0, _mean_iterations),
]

HEISENBERG: list[Check] = [
    ("chart-roundtrip", "matrix chart logarithm", 1e-13, _chart_roundtrip),
    ("heisenberg-table", "Heisenberg coefficient table", 1e-12, _heisenberg_table),
    ("geodesic", "geodesics through the identity are one-parameter subgroups", 1e-6, _geodesic),
]


def run_suite(
    alg: LieAlgebraSpec,
    g: MetricAtUnit | None = None,
    seed: int = 0,
    tol: float | None = None,
    threads: int | None = None,
) -> list[CheckResult]:
    """Run every check that applies to ``alg``; results come back in a fixed order.

    ``tol`` overrides every default tolerance with that single value.
    """
    g = g if g is not None else default_metric(alg, seed)
    checks = list(COMMON)
    if alg.is_two_step():
        checks += TWO_STEP
        if alg.kind == "heisenberg":
            checks += HEISENBERG

    def run(item):
        idx, (name, anchor, default_tol, fn) = item
        rng = np.random.default_rng([seed, idx])
        try:
            residual = float(fn(alg, g, rng))
        except (ArithmeticError, ValueError, np.linalg.LinAlgError):
            residual = float("inf")
        return CheckResult(name, anchor, residual, default_tol if tol is None else tol)

    workers = threads or worker_count()
    items = list(enumerate(checks))
    if workers <= 1:
        return [run(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, items))
