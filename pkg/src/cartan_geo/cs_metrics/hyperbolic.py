"""Hyperbolic bases for quadratic 2-step nilpotent algebras.

Given a nondegenerate form on a ``2n``-dimensional space and a Lagrangian
subspace, one hyperbolic plane is split off per step: pick an isotropic
``v`` in the Lagrangian, a partner ``w`` with ``g(v, w) != 0``, replace
``w`` by its isotropic correction ``v*`` and continue in the orthogonal
complement of ``span(v, v*)``.
"""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateMetricError, DimensionError, InvariantError
from ..lie_core import LieAlgebraSpec, _null, _orth, change_basis, derived_ideal
from .solver import MetricAtUnit

__all__ = ["hyperbolic_basis", "isotropic_dual", "random_quadratic_two_step"]

ISOTROPY_TOL = 1e-12


def isotropic_dual(g: np.ndarray, v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Isotropic vector ``v*`` in ``span(v, w)`` with ``g(v, v*) = 1``.

    ``v`` must be isotropic and ``g(v, w)`` nonzero.
    """
    a = float(v @ g @ w)
    if a == 0.0:
        raise DegenerateMetricError("partner vector is orthogonal to v")
    return (w - (w @ g @ w) / (2.0 * a) * v) / a


def hyperbolic_basis(g, lagrangian) -> np.ndarray:
    """Basis with Gram matrix ``[[0, I], [I, 0]]`` whose second half spans ``lagrangian``.

    Parameters
    ----------
    g : (2n, 2n) array_like or MetricAtUnit
        Nondegenerate symmetric form.
    lagrangian : (2n, n) array_like
        Columns spanning a totally isotropic subspace of dimension ``n``.

    Returns
    -------
    (2n, 2n) ndarray
        Columns ``e_1..e_n, e_{n+1}..e_{2n}``.
    """
    g = g.matrix if isinstance(g, MetricAtUnit) else MetricAtUnit(g).matrix
    d = g.shape[0]
    if d % 2:
        raise DimensionError("a hyperbolic basis needs an even-dimensional space")
    n = d // 2
    lag = np.asarray(lagrangian, dtype=float)
    if lag.ndim == 1:
        lag = lag[:, None]
    if lag.shape[0] != d:
        raise DimensionError(f"Lagrangian vectors must have length {d}")
    lt = _orth(lag)
    if lt.shape[1] != n:
        raise DimensionError(f"Lagrangian must have dimension {n}, got {lt.shape[1]}")
    scale = max(1.0, float(np.max(np.abs(g))))
    if np.max(np.abs(lt.T @ g @ lt)) > ISOTROPY_TOL * scale:
        raise InvariantError("given subspace is not totally isotropic")

    space = np.eye(d)
    firsts, seconds = [], []
    for _ in range(n):
        # most strongly paired direction of the Lagrangian against the current space
        _, _, vh = np.linalg.svd(space.T @ g @ lt)
        v = lt @ vh[0]
        w = space @ (space.T @ g @ v)
        v_star = isotropic_dual(g, v, w)
        firsts.append(v_star)
        seconds.append(v)
        pair = np.column_stack([v, v_star])
        space = _orth(space @ _null(pair.T @ g @ space))
        keep = _null((v_star @ g @ lt)[None, :])
        lt = _orth(lt @ keep) if keep.shape[1] else lt[:, :0]
    return np.column_stack(firsts + seconds)


def random_quadratic_two_step(n: int, seed: int | None = None, scramble: bool = True):
    """Quadratic 2-step algebra ``V + Z`` from a random alternating 3-form on ``V``.

    ``[e_i, e_j] = sum_k phi_ijk e_{n+k}`` with the invariant form pairing
    ``V`` and ``Z``. With ``scramble`` the result is re-expressed in a random
    basis. Returns ``(alg, g, lagrangian)`` with ``lagrangian`` spanning
    ``[g, g]``. Draws whose derived ideal is not ``n``-dimensional (always the
    case for ``n = 4``) are rejected.
    """
    if n < 3:
        raise DimensionError("an alternating 3-form needs n >= 3")
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((n, n, n))
    phi = sum(np.transpose(raw, p) * s for p, s in _SIGNED_PERMS) / 6.0
    d = 2 * n
    c = np.zeros((d, d, d))
    c[:n, :n, n:] = phi
    alg = LieAlgebraSpec(c, kind="raw", params={"quadratic_n": n})
    g = np.block([[np.zeros((n, n)), np.eye(n)], [np.eye(n), np.zeros((n, n))]])
    if scramble:
        b = rng.standard_normal((d, d)) + 2.0 * np.eye(d)
        alg = change_basis(alg, b)
        g = b.T @ g @ b
    lag = derived_ideal(alg)
    if lag.shape[1] != n:
        raise InvariantError(f"derived ideal has dimension {lag.shape[1]}, expected {n}")
    return alg, g, lag


_SIGNED_PERMS = [((0, 1, 2), 1), ((1, 2, 0), 1), ((2, 0, 1), 1), ((1, 0, 2), -1), ((0, 2, 1), -1), ((2, 1, 0), -1)]
