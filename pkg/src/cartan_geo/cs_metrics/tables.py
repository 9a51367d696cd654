"""Explicit polynomial coefficient tables for Heisenberg and H-type groups.

These are written out term by term, independently of the matrix route in
:mod:`.field`, so the two can be checked against each other.
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionError
from ..lie_core import HTypeSpec, make_htype
from .solver import MetricAtUnit

__all__ = ["heisenberg_metric_coeffs", "htype_metric_coeffs"]


def _matrix(k) -> np.ndarray:
    return k.matrix if isinstance(k, MetricAtUnit) else np.asarray(k, dtype=float)


def heisenberg_metric_coeffs(n: int, k, point) -> np.ndarray:
    """Coefficients on ``d/dx_i, d/dy_j, d/dz`` at a Heisenberg-matrix-chart point.

    ``k`` is the metric at the identity on ``(e_1..e_n, e_{n+1}..e_{2n}, e_{2n+1})``.
    Every entry is a polynomial of degree <= 2 in ``(x, y)``; none depends on ``z``.
    """
    k = _matrix(k)
    d = 2 * n + 1
    if k.shape != (d, d):
        raise DimensionError(f"metric must be {d}x{d} for n={n}")
    p = np.asarray(point, dtype=float)
    if p.shape != (d,):
        raise DimensionError(f"point must have {d} coordinates")
    x, y = p[:n], p[n : 2 * n]
    z = 2 * n
    kzz = k[z, z]
    out = np.empty((d, d))
    for i in range(n):
        out[i, z] = out[z, i] = k[i, z] - 0.5 * y[i] * kzz
        out[n + i, z] = out[z, n + i] = k[n + i, z] - 0.5 * x[i] * kzz
        for j in range(n):
            out[i, j] = (
                k[i, j]
                - 0.5 * y[i] * k[z, j]
                - 0.5 * y[j] * k[i, z]
                + 0.25 * y[i] * y[j] * kzz
            )
            out[i, n + j] = out[n + j, i] = (
                k[i, n + j]
                - 0.5 * y[i] * k[n + j, z]
                - 0.5 * x[j] * k[i, z]
                + 0.25 * y[i] * x[j] * kzz
            )
            out[n + i, n + j] = (
                k[n + i, n + j]
                - 0.5 * (x[i] * k[n + j, z] + x[j] * k[n + i, z])
                + 0.25 * x[i] * x[j] * kzz
            )
    out[z, z] = kzz
    return out


def htype_metric_coeffs(spec: HTypeSpec, d, point) -> np.ndarray:
    """Coefficients on ``d/dx^i, d/dz^a`` at an exponential-coordinate point.

    Assembled from the closed form as a sum of symmetric products: a term
    ``c dx^a dx^b`` with ``a != b`` contributes ``c`` to both ``(a, b)`` and
    ``(b, a)``; squares contribute to the diagonal.  Uses
    ``C[j, l, n+q] = -gamma[q, j, l]``.
    """
    n, m = spec.n, spec.m
    dm = _matrix(d)
    if dm.shape != (n + m, n + m):
        raise DimensionError(f"metric must be {n + m}x{n + m}")
    p = np.asarray(point, dtype=float)
    if p.shape != (n + m,):
        raise DimensionError(f"point must have {n + m} coordinates")
    x = p[:n]
    gam = spec.gamma
    cz = make_htype(spec).C[:n, :n, n:]  # cz[p, i, a] = C_{pi}^{n+a}
    dzz = dm[n:, n:]
    dxz = dm[:n, n:]
    out = np.zeros((n + m, n + m))

    def sym(a, b, c):
        out[a, b] += c
        out[b, a] += c

    # nu[a] = dz^a - 1/2 sum gamma^a_{pl} x^l dx^p, as a covector
    nu = np.zeros((m, n + m))
    for a in range(m):
        nu[a, :n] = -0.5 * gam[a] @ x
        nu[a, n + a] = 1.0
    # quad[i, j] = 1/4 sum C_{pi}^{n+a} C_{lj}^{n+b} d_{n+a,n+b} x^p x^l
    cx = np.einsum("pia,p->ia", cz, x)
    quad = 0.25 * cx @ dzz @ cx.T

    for i in range(n):
        lin = sum(gam[a, i, l] * dxz[i, a] * x[l] for a in range(m) for l in range(n))
        out[i, i] += quad[i, i] + lin + dm[i, i]
    for a in range(m):
        out += dzz[a, a] * np.outer(nu[a], nu[a])
    for i in range(n):
        for j in range(i + 1, n):
            lin = 0.5 * sum(
                (cz[l, i, a] * dxz[j, a] + cz[l, j, a] * dxz[i, a]) * x[l] for a in range(m) for l in range(n)
            )
            sym(i, j, quad[i, j] + lin + dm[i, j])
    mixed = 0.5 * cx @ dzz + dxz  # mixed[i, a]
    for i in range(n):
        for a in range(m):
            sym(i, n + a, mixed[i, a])
    gx = np.einsum("apl,l->ap", gam, x)  # gx[a, p] = sum_l gamma^a_{pl} x^l
    for i in range(n):
        for q in range(n):
            sym(i, q, -0.5 * sum(mixed[i, a] * gx[a, q] for a in range(m)))
    for a in range(m):
        for b in range(a + 1, m):
            out += dzz[a, b] * (np.outer(nu[a], nu[b]) + np.outer(nu[b], nu[a]))
    return out
