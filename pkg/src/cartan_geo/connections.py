"""Connections on Lie groups expressed in the left-invariant frame.

A connection is stored as ``gamma[i, j, k]`` with
``nabla_{e_i+} e_j+ = sum_k gamma[i, j, k] e_k+``.  Left-invariant
connections are fully described by their value at the identity.  The
alpha-connections of a metric field and a left-invariant 3-tensor ``S`` are
not: raising ``S`` with the metric at ``s`` gives a point-dependent tensor
``A_s``, so those carry a callable for ``gamma(s)`` and its derivative along
left-invariant fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .cs_metrics.field import MetricField, Strategy
from .cs_metrics.solver import MetricAtUnit
from .errors import DimensionError, InvariantError
from .lie_core import GroupPoint, LieAlgebraSpec, center

__all__ = [
    "ConnectionCoeffs",
    "TriTensor",
    "alpha_connections",
    "biinvariance_residual",
    "biinvariant_connection",
    "bracket_map",
    "canonical_connection",
    "check_duality",
    "closed_form_product",
    "coboundary",
    "cocycle_check",
    "covariant_derivative_of_metric",
    "curvature",
    "dual_curvature_residual",
    "hessian_check",
    "metric_field_for",
    "torsion",
]

SYMMETRY_TOL = 1e-14
CONDITION_TOL = 1e-12

_PERMS = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]


@dataclass(frozen=True, eq=False)
class TriTensor:
    """Totally symmetric covariant 3-tensor ``S[i, j, k]``."""

    entries: np.ndarray

    def __post_init__(self):
        s = np.array(self.entries, dtype=float)
        if s.ndim != 3 or len(set(s.shape)) != 1:
            raise DimensionError(f"3-tensor must have shape (d, d, d), got {s.shape}")
        scale = max(1.0, float(np.max(np.abs(s)))) if s.size else 1.0
        if max(float(np.max(np.abs(s - s.transpose(p)))) for p in _PERMS) > SYMMETRY_TOL * scale:
            raise InvariantError("3-tensor is not totally symmetric")
        s.flags.writeable = False
        object.__setattr__(self, "entries", s)

    @classmethod
    def symmetrized(cls, entries) -> "TriTensor":
        s = np.asarray(entries, dtype=float)
        return cls(sum(s.transpose(p) for p in _PERMS) / 6.0)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class ConnectionCoeffs:
    """Connection coefficients in the left-invariant frame.

    ``gamma`` is the value at the identity.  ``varying`` maps a point (in
    exponential coordinates or as a :class:`GroupPoint`) to the coefficients
    there and ``varying_derivative(s, x)`` gives their derivative along
    ``x+``; both are ``None`` for left-invariant connections.
    """

    gamma: np.ndarray
    torsion_free: bool = True
    varying: Callable | None = None
    varying_derivative: Callable | None = None
    label: str = ""

    def __post_init__(self):
        g = np.array(self.gamma, dtype=float)
        if g.ndim != 3 or len(set(g.shape)) != 1:
            raise DimensionError(f"coefficients must have shape (d, d, d), got {g.shape}")
        g.flags.writeable = False
        object.__setattr__(self, "gamma", g)

    @property
    def dim(self) -> int:
        return self.gamma.shape[0]

    @property
    def left_invariant(self) -> bool:
        return self.varying is None

    def at(self, sigma=None) -> np.ndarray:
        if sigma is None or self.varying is None:
            return self.gamma
        return self.varying(sigma)

    def derivative(self, sigma, x) -> np.ndarray:
        """``x+`` applied to the coefficient functions at ``sigma``."""
        if self.varying_derivative is None:
            return np.zeros_like(self.gamma)
        return self.varying_derivative(sigma, np.asarray(x, dtype=float))

    def __call__(self, x, y, sigma=None) -> np.ndarray:
        return np.einsum("i,j,ijk->k", np.asarray(x, float), np.asarray(y, float), self.at(sigma))


def _check_dim(alg: LieAlgebraSpec, conn: ConnectionCoeffs):
    if conn.dim != alg.dim:
        raise DimensionError("connection and algebra dimensions differ")


def _points(alg: LieAlgebraSpec, sample_points) -> list:
    if sample_points is None:
        return [np.zeros(alg.dim)]
    if isinstance(sample_points, GroupPoint):
        return [sample_points]
    arr = sample_points
    if isinstance(arr, np.ndarray) and arr.ndim == 1:
        return [arr]
    return list(arr)


def canonical_connection(alg: LieAlgebraSpec) -> ConnectionCoeffs:
    """``nabla_x y = [x, y] / 2``."""
    return ConnectionCoeffs(0.5 * alg.C, label="canonical")


def torsion(conn: ConnectionCoeffs, alg: LieAlgebraSpec, sigma=None) -> np.ndarray:
    _check_dim(alg, conn)
    g = conn.at(sigma)
    return g - g.transpose(1, 0, 2) - alg.C


def curvature(conn: ConnectionCoeffs, alg: LieAlgebraSpec, sigma=None) -> np.ndarray:
    """``R[i, j, k, l]``: ``l``-component of ``R(e_i, e_j) e_k`` in the left-invariant frame.

    ``R(x, y) = nabla_x nabla_y - nabla_y nabla_x - nabla_[x,y]``; for
    point-dependent connections the derivative of the coefficients enters.
    """
    _check_dim(alg, conn)
    d = alg.dim
    g = conn.at(sigma)
    # second[i, j, k, l] = (nabla_i (nabla_j e_k))_l without the coefficient derivative
    second = np.einsum("jkm,iml->ijkl", g, g)
    if conn.left_invariant:
        dg = np.zeros((d,) * 4)
    else:
        eye = np.eye(d)
        dg = np.array([conn.derivative(sigma, eye[i]) for i in range(d)])  # dg[i, j, k, l]
    return dg - dg.transpose(1, 0, 2, 3) + second - second.transpose(1, 0, 2, 3) - np.einsum(
        "ijm,mkl->ijkl", alg.C, g
    )


def metric_field_for(alg: LieAlgebraSpec, g) -> MetricField:
    """Metric field used by the field-level checks (exact for class <= 2)."""
    unit = g if isinstance(g, MetricAtUnit) else MetricAtUnit(g)
    if alg.is_two_step():
        return MetricField(alg, unit)
    return MetricField(alg, unit, Strategy.SERIES, order=max(1, alg.dim))


def _raise_first_two(m: np.ndarray, s: np.ndarray) -> np.ndarray:
    # solve m a[i, j, :] = s[i, j, :] for every (i, j)
    d = m.shape[0]
    return np.linalg.solve(m, s.reshape(d * d, d).T).T.reshape(d, d, d)


def alpha_connections(
    alg: LieAlgebraSpec, g, S, alpha: float, field: MetricField | None = None
) -> tuple[ConnectionCoeffs, ConnectionCoeffs]:
    """The pair ``nabla -+ (alpha/2) A`` with ``mu_s(A(x, y), z) = S(x, y, z)``.

    ``S`` is taken left-invariant and ``A`` is raised with the metric field at
    each point, so the pair is dual and ``nabla^alpha mu = alpha S``
    everywhere, not only at the identity.
    """
    s = S.entries if isinstance(S, TriTensor) else TriTensor(S).entries
    if s.shape[0] != alg.dim:
        raise DimensionError("tensor and algebra dimensions differ")
    field = field or metric_field_for(alg, g)
    base = 0.5 * alg.C
    alpha = float(alpha)

    def a_at(sigma):
        return _raise_first_two(field.frame(sigma), s)

    def a_derivative(sigma, x):
        m = field.frame(sigma)
        dm = field.frame_derivative(sigma, x)
        a = _raise_first_two(m, s)
        return -_raise_first_two(m, np.einsum("pq,ijq->ijp", dm, a))

    def make(sign, label):
        return ConnectionCoeffs(
            base + sign * 0.5 * alpha * a_at(np.zeros(alg.dim)),
            varying=lambda sigma: base + sign * 0.5 * alpha * a_at(sigma),
            varying_derivative=lambda sigma, x: sign * 0.5 * alpha * a_derivative(sigma, x),
            label=label,
        )

    return make(-1.0, f"alpha={alpha:g}"), make(1.0, f"alpha={-alpha:g}")


def _lowered(conn: ConnectionCoeffs, m: np.ndarray, sigma) -> np.ndarray:
    # low[x, y, z] = mu_s(nabla_x y, z)
    return np.einsum("xyk,kz->xyz", conn.at(sigma), m)


def _metric_derivatives(field: MetricField, sigma) -> np.ndarray:
    eye = np.eye(field.alg.dim)
    return np.array([field.frame_derivative(sigma, eye[a]) for a in range(field.alg.dim)])


def check_duality(
    alg: LieAlgebraSpec,
    g,
    conn1: ConnectionCoeffs,
    conn2: ConnectionCoeffs,
    sample_points=None,
    field: MetricField | None = None,
) -> float:
    """Max of ``|x+ mu(y+, z+) - mu(nabla1_x y, z) - mu(y, nabla2_x z)|``.

    Taken over basis triples and the sample points (identity by default).
    """
    _check_dim(alg, conn1)
    _check_dim(alg, conn2)
    field = field or metric_field_for(alg, g)
    worst = 0.0
    for sigma in _points(alg, sample_points):
        m = field.frame(sigma)
        dm = _metric_derivatives(field, sigma)
        res = dm - _lowered(conn1, m, sigma) - _lowered(conn2, m, sigma).transpose(0, 2, 1)
        worst = max(worst, float(np.max(np.abs(res))))
    return worst


def covariant_derivative_of_metric(
    alg: LieAlgebraSpec, g, conn: ConnectionCoeffs, sample_points=None, field: MetricField | None = None
) -> list[np.ndarray]:
    """``(nabla mu)(x, y, z) = x+ mu(y, z) - mu(nabla_x y, z) - mu(y, nabla_x z)`` per sample."""
    _check_dim(alg, conn)
    field = field or metric_field_for(alg, g)
    out = []
    for sigma in _points(alg, sample_points):
        m = field.frame(sigma)
        low = _lowered(conn, m, sigma)
        out.append(_metric_derivatives(field, sigma) - low - low.transpose(0, 2, 1))
    return out


def dual_curvature_residual(
    alg: LieAlgebraSpec,
    g,
    conn1: ConnectionCoeffs,
    conn2: ConnectionCoeffs,
    sample_points=None,
    field: MetricField | None = None,
) -> float:
    """Max of ``|mu(R1(x, y) u, v) + mu(u, R2(x, y) v)|`` over basis 4-tuples."""
    field = field or metric_field_for(alg, g)
    worst = 0.0
    for sigma in _points(alg, sample_points):
        m = field.frame(sigma)
        r1 = np.einsum("ijkl,lv->ijkv", curvature(conn1, alg, sigma), m)
        r2 = np.einsum("ijkl,lv->ijkv", curvature(conn2, alg, sigma), m)
        worst = max(worst, float(np.max(np.abs(r1 + r2.transpose(0, 1, 3, 2)))))
    return worst


def biinvariance_residual(alg: LieAlgebraSpec, conn: ConnectionCoeffs) -> float:
    """Max of ``|[z, nabla_x y] - nabla_[z,x] y - nabla_x [z, y]|`` at the identity."""
    _check_dim(alg, conn)
    return cocycle_check(alg, conn.gamma)


def cocycle_check(alg: LieAlgebraSpec, k) -> float:
    """Max over basis triples of ``|[z, k(x, y)] - k([z, x], y) - k(x, [z, y])|``.

    ``k[i, j, :]`` is ``k(e_i, e_j)``.
    """
    k = np.asarray(k, dtype=float)
    if k.shape != (alg.dim,) * 3:
        raise DimensionError("bilinear map and algebra dimensions differ")
    c = alg.C
    t1 = np.einsum("xym,zmk->zxyk", k, c)
    t2 = np.einsum("zxm,myk->zxyk", c, k)
    t3 = np.einsum("zym,xmk->zxyk", c, k)
    return float(np.max(np.abs(t1 - t2 - t3)))


def coboundary(alg: LieAlgebraSpec, psi) -> np.ndarray:
    """``k(x, y) = [x, psi(y)] - psi([x, y])`` for a linear map ``psi`` (matrix acting on columns)."""
    psi = np.asarray(psi, dtype=float)
    if psi.shape != (alg.dim, alg.dim):
        raise DimensionError("linear map and algebra dimensions differ")
    return np.einsum("mj,imk->ijk", psi, alg.C) - np.einsum("km,ijm->ijk", psi, alg.C)


def biinvariant_connection(
    alg: LieAlgebraSpec, B_list: Sequence, X_list: Sequence, tol: float = CONDITION_TOL
) -> ConnectionCoeffs:
    """``nabla - k/2`` with ``k(x, y) = sum_j B_j(x, y) X_j``.

    Each ``X_j`` must be central and each ``B_j`` symmetric with
    ``B_j([x, y], z) + B_j(y, [x, z]) = 0``; the result is torsion-free and
    biinvariant.
    """
    if len(B_list) != len(X_list):
        raise DimensionError("need one central vector per bilinear form")
    d = alg.dim
    k = np.zeros((d, d, d))
    zc = center(alg)
    for b, x in zip(B_list, X_list):
        b = np.asarray(b, dtype=float)
        x = np.asarray(x, dtype=float)
        if b.shape != (d, d) or x.shape != (d,):
            raise DimensionError("form or vector has the wrong size")
        scale = max(1.0, float(np.max(np.abs(b))))
        if np.max(np.abs(b - b.T)) > tol * scale:
            raise InvariantError("bilinear form is not symmetric")
        if np.linalg.norm(x - zc @ (zc.T @ x)) > tol * max(1.0, np.linalg.norm(x)):
            raise InvariantError("vector is not central")
        cb = np.einsum("xym,mz->xyz", alg.C, b)
        if np.max(np.abs(cb + cb.transpose(0, 2, 1))) > tol * scale:
            raise InvariantError("bilinear form is not parallel for the canonical connection")
        k += np.einsum("ij,k->ijk", b, x)
    return ConnectionCoeffs(0.5 * alg.C - 0.5 * k, label="biinvariant")


def closed_form_product(alg: LieAlgebraSpec, forms: Iterable, tol: float = CONDITION_TOL) -> np.ndarray:
    """Symmetric product of closed 1-forms, checked via ``f([x, y]) = 0``."""
    forms = [np.asarray(f, dtype=float) for f in forms]
    for f in forms:
        if np.max(np.abs(np.einsum("ijk,k->ij", alg.C, f))) > tol * max(1.0, float(np.max(np.abs(f)))):
            raise InvariantError("1-form is not closed")
    if len(forms) == 1:
        return np.outer(forms[0], forms[0])
    f, h = forms
    return 0.5 * (np.outer(f, h) + np.outer(h, f))


def hessian_check(alg: LieAlgebraSpec, g, t) -> float:
    """Max violation of ``g(t(x,y),z) + g(y,t(x,z)) = g(t(y,x),z) + g(x,t(y,z))``."""
    gm = g.matrix if isinstance(g, MetricAtUnit) else np.asarray(g, dtype=float)
    t = np.asarray(t, dtype=float)
    if t.shape != (alg.dim,) * 3 or gm.shape != (alg.dim, alg.dim):
        raise DimensionError("inputs and algebra dimensions differ")
    low = np.einsum("xyk,kz->xyz", t, gm)
    res = low + low.transpose(0, 2, 1) - low.transpose(1, 0, 2) - low.transpose(2, 0, 1)
    return float(np.max(np.abs(res)))


def bracket_map(alg: LieAlgebraSpec) -> np.ndarray:
    """The bracket itself as a bilinear map array."""
    return np.array(alg.C)

