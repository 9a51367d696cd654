"""Biinvariant means on 2-step nilpotent groups.

The biinvariant mean ``m`` of points ``s_1..s_p`` solves
``sum_i log(m^-1 s_i) = 0``.  Three routes are provided: the parametric
closed form for H-type groups, a fixed-point barycenter iteration that only
uses the group law, and a chart-aware wrapper for data given in the
Heisenberg matrix chart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import ChartError, DimensionError
from .lie_core import (
    Chart,
    GroupPoint,
    HTypeSpec,
    LieAlgebraSpec,
    exp_chart,
    group_inverse,
    group_product,
    log_chart,
    make_heisenberg,
    make_htype,
)

__all__ = [
    "Dataset",
    "MeanMethod",
    "MeanResult",
    "barycenter_fixed_point",
    "barycenter_residual",
    "gamma_correction",
    "heisenberg_z_mean",
    "mean_in_chart",
    "mean_report",
    "parametric_mean_closed_form",
]

ARITHMETIC_TOL = 1e-15


class MeanMethod(str, Enum):
    CLOSED_FORM = "closed_form"
    FIXED_POINT = "fixed_point"


@dataclass(frozen=True, eq=False)
class Dataset:
    """``p`` points of an ``(n + m)``-dimensional group, one per row."""

    points: np.ndarray
    chart: Chart = Chart.EXPONENTIAL
    n: int | None = None
    m: int | None = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[None, :]
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise DimensionError("dataset must hold at least one point")
        if self.n is not None and self.m is not None and pts.shape[1] != self.n + self.m:
            raise DimensionError(f"rows have {pts.shape[1]} entries, expected n + m = {self.n + self.m}")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "chart", Chart(self.chart))

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True, eq=False)
class MeanResult:
    mean: GroupPoint
    residual: float
    iterations: int
    method: MeanMethod
    converged: bool = True
    equals_arithmetic_mean: bool | None = None
    arithmetic_deviation: float | None = None

    def to_dict(self) -> dict:
        return {
            "mean": self.mean.coords.tolist(),
            "residual": self.residual,
            "iterations": self.iterations,
            "method": self.method.value,
            "equals_arithmetic_mean": self.equals_arithmetic_mean,
        }


def _exp_points(alg: LieAlgebraSpec, data: Dataset) -> np.ndarray:
    if data.dim != alg.dim:
        raise DimensionError("dataset and group dimensions differ")
    if data.chart is Chart.EXPONENTIAL:
        return np.array(data.points)
    return np.array([log_chart(alg, GroupPoint(data.chart, row)) for row in data.points])


def barycenter_residual(alg: LieAlgebraSpec, mean: GroupPoint, data: Dataset) -> float:
    """``|| sum_i log(m^-1 s_i) ||`` evaluated with the group law point by point."""
    inv = group_inverse(alg, mean)
    logs = [log_chart(alg, group_product(alg, inv, GroupPoint(data.chart, row))) for row in data.points]
    return float(np.linalg.norm(_fsum_rows(logs)))


def _fsum_rows(rows) -> np.ndarray:
    # correctly rounded column sums keep the certificate independent of p
    return np.array([math.fsum(col) for col in np.asarray(rows).T])


def gamma_correction(gamma: np.ndarray, points: np.ndarray) -> np.ndarray:
    """``1/4 sum_{j,l} gamma[q, j, l] (E x^j E x^l - E[x^j x^l])`` for each ``q``.

    Summed over the pairs ``{j, l}`` so that antisymmetric ``gamma`` cancels
    exactly against the symmetric moment matrix.
    """
    gamma = np.asarray(gamma, dtype=float)
    n = gamma.shape[1]
    x = points[:, :n]
    e = np.mean(x, axis=0)
    moment = x.T @ x / x.shape[0]
    spread = np.outer(e, e) - 0.5 * (moment + moment.T)
    out = np.zeros(gamma.shape[0])
    for q in range(gamma.shape[0]):
        acc = 0.0
        for j in range(n):
            acc += gamma[q, j, j] * spread[j, j]
            for l in range(j + 1, n):
                acc += gamma[q, j, l] * spread[j, l] + gamma[q, l, j] * spread[l, j]
        out[q] = 0.25 * acc
    return out


def parametric_mean_closed_form(spec: HTypeSpec, data: Dataset) -> MeanResult:
    """Closed-form mean of exponential-coordinate data on an H-type group.

    ``m^k = E(x^k)`` on ``V`` and ``m^{n+q} = E(x^{n+q}) + gamma_correction``
    on the center.
    """
    if data.chart is not Chart.EXPONENTIAL:
        raise ChartError("closed form needs exponential-chart data")
    alg = make_htype(spec)
    if data.dim != alg.dim:
        raise DimensionError("dataset and group dimensions differ")
    pts = np.array(data.points)
    arith = np.mean(pts, axis=0)
    m = arith.copy()
    m[spec.n :] = arith[spec.n :] + gamma_correction(spec.gamma, pts)
    mean = GroupPoint(Chart.EXPONENTIAL, m)
    dev = float(np.max(np.abs(m - arith)))
    return MeanResult(
        mean,
        barycenter_residual(alg, mean, data),
        0,
        MeanMethod.CLOSED_FORM,
        equals_arithmetic_mean=dev <= ARITHMETIC_TOL,
        arithmetic_deviation=dev,
    )


def barycenter_fixed_point(
    alg: LieAlgebraSpec, data: Dataset, tol: float = 1e-12, max_iter: int = 50
) -> MeanResult:
    """Iterate ``m <- m exp(mean_i log(m^-1 s_i))`` from the first data point.

    Returns the last iterate in the data's chart; ``converged`` is false when
    ``max_iter`` updates did not bring the residual below ``tol``.
    """
    alg.require_two_step()
    pts = _exp_points(alg, data)
    p = pts.shape[0]
    m = GroupPoint(Chart.EXPONENTIAL, pts[0])
    exp_data = Dataset(pts, Chart.EXPONENTIAL)
    iterations = 0
    while True:
        inv = group_inverse(alg, m)
        logs = np.array([log_chart(alg, group_product(alg, inv, GroupPoint(Chart.EXPONENTIAL, s))) for s in pts])
        total = _fsum_rows(logs)
        if np.linalg.norm(total) <= tol or iterations >= max_iter:
            break
        m = group_product(alg, m, exp_chart(alg, total / p))
        iterations += 1
    residual = barycenter_residual(alg, m, exp_data)
    out = m if data.chart is Chart.EXPONENTIAL else exp_chart(alg, m.coords, data.chart)
    if data.chart is not Chart.EXPONENTIAL:
        residual = barycenter_residual(alg, out, data)
    return MeanResult(out, residual, iterations, MeanMethod.FIXED_POINT, converged=residual <= tol)


def mean_in_chart(alg: LieAlgebraSpec, data: Dataset, tol: float = 1e-12) -> MeanResult:
    """Biinvariant mean of data in any supported chart, reported in that chart.

    The mean is the arithmetic mean of the logarithms, mapped back. In the
    Heisenberg matrix chart this couples the center coordinate to the sample
    cross-moment of ``(x, y)``, see :func:`heisenberg_z_mean`.
    """
    pts = _exp_points(alg, data)
    arith_log = np.mean(pts, axis=0)
    mean = exp_chart(alg, arith_log, data.chart)
    residual = barycenter_residual(alg, mean, data)
    chart_arith = np.mean(data.points, axis=0)
    dev = float(np.max(np.abs(mean.coords - chart_arith)))
    return MeanResult(
        mean,
        residual,
        0,
        MeanMethod.CLOSED_FORM,
        converged=residual <= tol,
        equals_arithmetic_mean=dev <= ARITHMETIC_TOL,
        arithmetic_deviation=dev,
    )


def heisenberg_z_mean(points) -> np.ndarray:
    """``E(z) - E(x . y)/2 + E(x) . E(y)/2`` for Heisenberg-matrix-chart rows ``(x, y, z)``."""
    pts = np.asarray(points, dtype=float)
    n = (pts.shape[1] - 1) // 2
    x, y, z = pts[:, :n], pts[:, n : 2 * n], pts[:, 2 * n]
    ex, ey = np.mean(x, axis=0), np.mean(y, axis=0)
    return np.mean(z) - 0.5 * np.mean(np.sum(x * y, axis=1)) + 0.5 * ex @ ey


def mean_report(spec: HTypeSpec, data: Dataset, gammas: Sequence[HTypeSpec]) -> list[dict]:
    """Closed-form mean for each parameter in a sweep.

    Exponential-chart data is used as is.  Heisenberg-matrix-chart data is
    first mapped to exponential coordinates with the Heisenberg logarithm and
    each mean is mapped back, so rows report means in the data's chart and
    the flag compares against the arithmetic mean of the raw rows.
    """
    if data.chart is Chart.HEISENBERG:
        heis = make_heisenberg((data.dim - 1) // 2)
        exp_data = Dataset(_exp_points(heis, data), Chart.EXPONENTIAL)
    else:
        heis = None
        exp_data = data
    arith = np.mean(data.points, axis=0)
    rows = []
    for idx, g in enumerate(gammas or [spec]):
        res = parametric_mean_closed_form(g, exp_data)
        coords = res.mean.coords if heis is None else exp_chart(heis, res.mean.coords, Chart.HEISENBERG).coords
        dev = float(np.max(np.abs(coords - arith)))
        rows.append(
            {
                "gamma_id": idx,
                "mean": coords.tolist(),
                "residual": res.residual,
                "equals_arithmetic_mean": dev <= ARITHMETIC_TOL,
                "max_deviation": dev,
            }
        )
    return rows
