"""Cartan-Schouten metric fields built from their value at the identity.

On a group whose exponential map is a diffeomorphism the metric on
left-invariant fields is

    mu(x+, y+)(s) = sum_{p,q} gbar(ad_L^p x, ad_L^q y) / (p! q! 2^(p+q)),  L = log s,

i.e. ``P^T gbar P`` with ``P = exp(ad_L / 2)``.  For 2-step nilpotent
algebras the series stops after the linear term and the field is a
quadratic polynomial in exponential coordinates, which is what makes exact
derivatives cheap here.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from ..errors import ChartError, DimensionError, NilpotencyError
from ..lie_core import Chart, GroupPoint, HTypeSpec, LieAlgebraSpec, ad, bracket, log_chart, to_chart
from .solver import MetricAtUnit
from .tables import heisenberg_metric_coeffs, htype_metric_coeffs

__all__ = [
    "MetricField",
    "QuadraticPoly",
    "Strategy",
    "coordinate_christoffel",
    "frame_to_chart",
    "heisenberg_geodesic",
    "integrate_geodesic",
    "levi_civita_frame",
    "metric_field_2nil",
    "metric_field_series",
    "parallelism_residual",
]


class Strategy(str, Enum):
    CLOSED_FORM_2NIL = "closed_form_2nil"
    SERIES = "series"
    HEISENBERG_TABLE = "heisenberg_table"
    HTYPE_TABLE = "htype_table"


def _log(alg: LieAlgebraSpec, sigma) -> np.ndarray:
    if isinstance(sigma, GroupPoint):
        return log_chart(alg, sigma)
    v = np.asarray(sigma, dtype=float)
    if v.shape != (alg.dim,):
        raise DimensionError(f"expected {alg.dim} exponential coordinates, got shape {v.shape}")
    return v


def _gbar(g) -> np.ndarray:
    return g.matrix if isinstance(g, MetricAtUnit) else np.asarray(g, dtype=float)


def metric_field_2nil(alg: LieAlgebraSpec, g, sigma, x, y) -> float:
    """Value of the Cartan-Schouten metric on ``(x+, y+)`` at ``sigma`` (class <= 2)."""
    alg.require_two_step()
    gm = _gbar(g)
    L = _log(alg, sigma)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lx = bracket(alg, L, x)
    ly = bracket(alg, L, y)
    return float(x @ gm @ y + 0.5 * (lx @ gm @ y) + 0.5 * (x @ gm @ ly) + 0.25 * (lx @ gm @ ly))


def _series_operator(alg: LieAlgebraSpec, L: np.ndarray, order: int) -> np.ndarray:
    half_ad = 0.5 * ad(alg, L)
    p = np.eye(alg.dim)
    term = np.eye(alg.dim)
    for k in range(1, order + 1):
        term = term @ half_ad / k
        p = p + term
    return p


def metric_field_series(alg: LieAlgebraSpec, g, sigma, x, y, order: int) -> float:
    """Truncation of the metric series at ``p, q <= order``.

    Exact for nilpotent algebras of class ``c`` once ``order >= c - 1``.
    """
    if order < 0:
        raise ValueError("series order must be nonnegative")
    L = _log(alg, sigma)
    p = _series_operator(alg, L, order)
    return float((p @ np.asarray(x, dtype=float)) @ _gbar(g) @ (p @ np.asarray(y, dtype=float)))


def frame_to_chart(alg: LieAlgebraSpec, sigma) -> np.ndarray:
    """Columns are the chart components of the left-invariant fields ``e_i+`` at ``sigma``.

    Exponential chart: ``d/dt log(s exp(t x)) = x + [log s, x]/2``.
    Heisenberg chart: ``e_{n+j}+ = d/dy_j + x_j d/dz``, other fields are coordinate fields.
    """
    alg.require_two_step()
    if isinstance(sigma, GroupPoint) and sigma.chart is Chart.HEISENBERG:
        n = (alg.dim - 1) // 2
        k = np.eye(alg.dim)
        k[2 * n, n : 2 * n] = sigma.coords[:n]
        return k
    L = _log(alg, sigma)
    return np.eye(alg.dim) + 0.5 * ad(alg, L)


@dataclass(frozen=True, eq=False)
class MetricField:
    """Metric field on the simply connected group, determined by ``unit_metric``.

    ``frame(s)`` is the Gram matrix of the left-invariant frame at ``s``;
    ``coordinates(s)`` the coefficient matrix on the coordinate fields of the
    chart ``s`` is given in.
    """

    alg: LieAlgebraSpec
    unit_metric: MetricAtUnit
    strategy: Strategy = Strategy.CLOSED_FORM_2NIL
    order: int | None = None
    htype: HTypeSpec | None = None

    def __post_init__(self):
        if not isinstance(self.unit_metric, MetricAtUnit):
            object.__setattr__(self, "unit_metric", MetricAtUnit(self.unit_metric))
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        if self.unit_metric.dim != self.alg.dim:
            raise DimensionError("metric and algebra dimensions differ")
        if self.strategy is Strategy.SERIES:
            if self.order is None or self.order < 0:
                raise ValueError("series strategy needs a nonnegative order")
        else:
            self.alg.require_two_step()
        if self.strategy is Strategy.HEISENBERG_TABLE and self.alg.kind != "heisenberg":
            raise ChartError("Heisenberg table needs a Heisenberg algebra")
        if self.strategy is Strategy.HTYPE_TABLE and self.htype is None:
            raise ValueError("H-type table needs the H-type spec")

    @property
    def g(self) -> np.ndarray:
        return self.unit_metric.matrix

    def _operator(self, L: np.ndarray) -> np.ndarray:
        if self.strategy is Strategy.SERIES:
            return _series_operator(self.alg, L, self.order)
        return np.eye(self.alg.dim) + 0.5 * ad(self.alg, L)

    def frame(self, sigma) -> np.ndarray:
        p = self._operator(_log(self.alg, sigma))
        return p.T @ self.g @ p

    def __call__(self, sigma, x, y) -> float:
        return float(np.asarray(x) @ self.frame(sigma) @ np.asarray(y))

    def series_tail(self, sigma) -> float:
        """Largest contribution of the terms with ``max(p, q) == order`` (series only)."""
        if self.strategy is not Strategy.SERIES:
            return 0.0
        L = _log(self.alg, sigma)
        if self.order == 0:
            return float(np.max(np.abs(self.g)))
        hi = _series_operator(self.alg, L, self.order)
        lo = _series_operator(self.alg, L, self.order - 1)
        return float(np.max(np.abs(hi.T @ self.g @ hi - lo.T @ self.g @ lo)))

    def frame_derivative(self, sigma, x) -> np.ndarray:
        """Exact ``x+ . mu(e_a+, e_b+)`` at ``sigma`` as a matrix over ``(a, b)``."""
        x = np.asarray(x, dtype=float)
        L = _log(self.alg, sigma)
        if self.strategy is Strategy.SERIES and self.order == 0:
            return np.zeros((self.alg.dim, self.alg.dim))
        if not self.alg.is_two_step():
            if np.any(L):
                raise NilpotencyError("exact derivatives off the identity need a class <= 2 algebra")
            a = 0.5 * ad(self.alg, x)
            return a.T @ self.g + self.g @ a
        j = np.eye(self.alg.dim) + 0.5 * ad(self.alg, L)
        vel = j @ x
        dj = 0.5 * ad(self.alg, vel)
        return dj.T @ self.g @ j + j.T @ self.g @ dj

    def coordinates(self, sigma) -> np.ndarray:
        if self.strategy is Strategy.HEISENBERG_TABLE:
            if not isinstance(sigma, GroupPoint):
                sigma = GroupPoint(Chart.EXPONENTIAL, sigma)
            q = to_chart(self.alg, sigma, Chart.HEISENBERG).coords
            return heisenberg_metric_coeffs(self.alg.params["n"], self.unit_metric, q)
        if self.strategy is Strategy.HTYPE_TABLE:
            return htype_metric_coeffs(self.htype, self.unit_metric, _log(self.alg, sigma))
        k = frame_to_chart(self.alg, sigma)
        kinv = np.linalg.inv(k)
        return kinv.T @ self.frame(sigma) @ kinv


def parallelism_residual(field: MetricField, sigma, x, y, z) -> float:
    """``x+ . mu(y+, z+) - (mu([x,y]+, z+) + mu(y+, [x,z]+)) / 2`` at ``sigma``."""
    alg = field.alg
    m = field.frame(sigma)
    lhs = np.asarray(y) @ field.frame_derivative(sigma, x) @ np.asarray(z)
    rhs = 0.5 * (bracket(alg, x, y) @ m @ z + np.asarray(y) @ m @ bracket(alg, x, z))
    return float(lhs - rhs)


def levi_civita_frame(field: MetricField, sigma) -> np.ndarray:
    """Christoffel symbols of the metric in the left-invariant frame, via Koszul.

    Returns ``G`` with ``nabla_{e_a+} e_b+ = sum_c G[a, b, c] e_c+`` at ``sigma``.
    """
    alg = field.alg
    d = alg.dim
    m = field.frame(sigma)
    dm = np.array([field.frame_derivative(sigma, np.eye(d)[a]) for a in range(d)])
    cm = np.einsum("abm,mc->abc", alg.C, m)
    lowered = (
        dm
        + dm.transpose(1, 0, 2)
        - dm.transpose(1, 2, 0)
        + cm
        - cm.transpose(0, 2, 1)
        - cm.transpose(2, 0, 1)
    )
    # lowered[a, b, c] = 2 mu(nabla_a b, c)
    return np.linalg.solve(m, 0.5 * lowered.reshape(d * d, d).T).T.reshape(d, d, d)


class QuadraticPoly:
    """Array-valued polynomial of degree <= 2 stored as coefficient tables.

    ``f(q) = c0 + sum_a q_a c1[a] + sum_{a,b} q_a q_b c2[a, b]`` with ``c2``
    symmetric in ``(a, b)``. Tables are recovered from a callable by exact
    interpolation on the stencil ``0, +-e_a, e_a + e_b``.
    """

    def __init__(self, c0, c1, c2):
        self.c0 = np.asarray(c0, dtype=float)
        self.c1 = np.asarray(c1, dtype=float)
        self.c2 = np.asarray(c2, dtype=float)
        self.nvars = self.c1.shape[0]

    @classmethod
    def interpolate(cls, f: Callable[[np.ndarray], np.ndarray], nvars: int) -> "QuadraticPoly":
        eye = np.eye(nvars)
        c0 = np.asarray(f(np.zeros(nvars)), dtype=float)
        plus = [np.asarray(f(eye[a]), dtype=float) for a in range(nvars)]
        minus = [np.asarray(f(-eye[a]), dtype=float) for a in range(nvars)]
        c1 = np.array([(plus[a] - minus[a]) / 2 for a in range(nvars)])
        diag = [(plus[a] + minus[a]) / 2 - c0 for a in range(nvars)]
        c2 = np.zeros((nvars, nvars) + c0.shape)
        for a in range(nvars):
            c2[a, a] = diag[a]
            for b in range(a + 1, nvars):
                both = np.asarray(f(eye[a] + eye[b]), dtype=float)
                c2[a, b] = c2[b, a] = (both - c0 - c1[a] - c1[b] - diag[a] - diag[b]) / 2
        return cls(c0, c1, c2)

    def __call__(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        return self.c0 + np.tensordot(q, self.c1, 1) + np.tensordot(q, np.tensordot(q, self.c2, 1), 1)

    def gradient(self, q) -> np.ndarray:
        """``out[a] = d f / d q_a`` at ``q``."""
        q = np.asarray(q, dtype=float)
        return self.c1 + 2.0 * np.tensordot(q, self.c2, axes=(0, 1))


def coordinate_christoffel(metric: QuadraticPoly, q) -> np.ndarray:
    """``Gamma[k, i, j]`` of a coordinate metric given as a quadratic polynomial."""
    g = metric(q)
    dg = metric.gradient(q)  # dg[a, i, j] = d_a g_ij
    # lowered[i, l, j] = d_i g_lj + d_j g_li - d_l g_ij
    lowered = dg + dg.transpose(2, 1, 0) - dg.transpose(1, 0, 2)
    return 0.5 * np.einsum("kl,ilj->kij", np.linalg.inv(g), lowered)


def integrate_geodesic(metric: QuadraticPoly, q0, v0, t_final: float = 1.0, step: float = 1e-3) -> np.ndarray:
    """Classical RK4 for ``q'' = -Gamma(q)(q', q')``; returns the sampled path."""
    nsteps = int(round(t_final / step))
    state = np.concatenate([np.asarray(q0, float), np.asarray(v0, float)])
    d = state.size // 2

    def rhs(s):
        q, v = s[:d], s[d:]
        gam = coordinate_christoffel(metric, q)
        return np.concatenate([v, -np.einsum("kij,i,j->k", gam, v, v)])

    path = [state[:d].copy()]
    for _ in range(nsteps):
        k1 = rhs(state)
        k2 = rhs(state + 0.5 * step * k1)
        k3 = rhs(state + 0.5 * step * k2)
        k4 = rhs(state + step * k3)
        state = state + step / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        path.append(state[:d].copy())
    return np.array(path)


def heisenberg_geodesic(field: MetricField, v, t_final: float = 1.0, step: float = 1e-3):
    """Geodesic from the identity with initial velocity ``v``, integrated in the matrix chart.

    The coordinate metric there is quadratic, so its Christoffel symbols are
    exact. Returns ``(times, path)`` with the path in exponential coordinates.
    """
    alg = field.alg
    if alg.kind != "heisenberg":
        raise ChartError("the matrix chart needs a Heisenberg group")
    metric = QuadraticPoly.interpolate(lambda q: field.coordinates(GroupPoint(Chart.HEISENBERG, q)), alg.dim)
    path = integrate_geodesic(metric, np.zeros(alg.dim), np.asarray(v, dtype=float), t_final, step)
    logs = np.array([log_chart(alg, GroupPoint(Chart.HEISENBERG, q)) for q in path])
    return np.linspace(0.0, t_final, len(path)), logs
