"""Unit-level Cartan-Schouten metrics: the linear constraint solver and checks.

A symmetric form ``B`` on the Lie algebra is Cartan-Schouten when every
``ad_u`` with ``u`` in the derived ideal is ``B``-skew:
``B(ad_u x, y) + B(x, ad_u y) = 0``.  The condition is linear in ``B``, so the
admissible forms make up a linear space that :func:`solve_cs_space` returns
as an explicit basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateMetricError, DimensionError, InvariantError
from ..lie_core import LieAlgebraSpec, ad, derived_ideal, is_solvable

__all__ = [
    "CSMetricSpace",
    "MetricAtUnit",
    "check_ad_invariance",
    "check_cs_condition",
    "check_quadratic_structure_constants",
    "riemannian_cs_exists",
    "riemannian_cs_witness",
    "signature",
    "solve_cs_space",
]

NULLSPACE_RTOL = 1e-10
DEGENERACY_RTOL = 1e-10


def _as_matrix(g) -> np.ndarray:
    if isinstance(g, MetricAtUnit):
        return g.matrix
    return np.asarray(g, dtype=float)


def _signature_of(matrix: np.ndarray) -> tuple[int, int]:
    scale = float(np.max(np.abs(matrix))) if matrix.size else 0.0
    if scale == 0.0:
        raise DegenerateMetricError("zero form has no signature")
    eig = np.linalg.eigvalsh(matrix)
    if np.any(np.abs(eig) < DEGENERACY_RTOL * scale):
        raise DegenerateMetricError(
            f"form is degenerate (smallest |eigenvalue| {np.min(np.abs(eig)):.3e}, scale {scale:.3e})"
        )
    return int(np.sum(eig > 0)), int(np.sum(eig < 0))


@dataclass(frozen=True, eq=False)
class MetricAtUnit:
    """Nondegenerate symmetric bilinear form on the Lie algebra.

    ``matrix[p, q]`` is the value on ``(e_p, e_q)``; the signature is computed
    on construction.
    """

    matrix: np.ndarray
    signature: tuple[int, int] = field(init=False, default=(0, 0))

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"metric must be a square matrix, got shape {m.shape}")
        scale = float(np.max(np.abs(m))) if m.size else 0.0
        if np.max(np.abs(m - m.T)) > 1e-14 * max(scale, 1.0):
            raise InvariantError("metric matrix is not symmetric")
        m = 0.5 * (m + m.T)
        dim = m.shape[0]
        if scale == 0.0 or abs(np.linalg.det(m / scale)) <= DEGENERACY_RTOL:
            raise DegenerateMetricError("metric matrix is degenerate")
        sig = _signature_of(m)
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "signature", sig)
        assert sum(sig) == dim

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, x, y) -> float:
        return float(np.asarray(x) @ self.matrix @ np.asarray(y))


def signature(g) -> tuple[int, int]:
    """``(p_plus, p_minus)`` eigenvalue counts; degenerate forms raise."""
    if isinstance(g, MetricAtUnit):
        return g.signature
    m = np.asarray(g, dtype=float)
    return _signature_of(0.5 * (m + m.T))


def _sym_index(dim: int):
    return [(p, q) for p in range(dim) for q in range(p, dim)]


def _sym_matrix(dim: int, coeffs: np.ndarray) -> np.ndarray:
    out = np.zeros((dim, dim))
    iu = np.triu_indices(dim)
    out[iu] = coeffs
    return out + np.triu(out, 1).T


@dataclass(frozen=True, eq=False)
class CSMetricSpace:
    """Basis of the linear space of Cartan-Schouten forms of an algebra."""

    alg: LieAlgebraSpec
    basis_matrices: tuple[np.ndarray, ...]

    @property
    def dimension(self) -> int:
        return len(self.basis_matrices)

    def combine(self, coeffs) -> np.ndarray:
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.dimension,):
            raise DimensionError(f"need {self.dimension} coefficients")
        out = np.zeros((self.alg.dim, self.alg.dim))
        for c, b in zip(coeffs, self.basis_matrices):
            out += c * b
        return out

    def samples(self, count: int = 5, seed: int = 0) -> list[dict]:
        """Random members with a nondegeneracy flag and signature (``None`` if degenerate)."""
        rng = np.random.default_rng(seed)
        out = []
        for _ in range(count):
            coeffs = rng.standard_normal(self.dimension)
            m = self.combine(coeffs)
            try:
                sig = signature(m)
            except DegenerateMetricError:
                sig = None
            out.append({"coefficients": coeffs, "matrix": m, "nondegenerate": sig is not None, "signature": sig})
        return out


def _constraint_matrix(alg: LieAlgebraSpec) -> np.ndarray:
    dim = alg.dim
    gens = derived_ideal(alg)
    pairs = _sym_index(dim)
    iu = np.triu_indices(dim)
    blocks = []
    for u in gens.T:
        a = ad(alg, u)
        cols = []
        for p, q in pairs:
            e = np.zeros((dim, dim))
            e[p, q] = e[q, p] = 1.0
            r = a.T @ e + e @ a
            cols.append(r[iu])
        blocks.append(np.array(cols).T)
    if not blocks:
        return np.zeros((0, len(pairs)))
    return np.vstack(blocks)


def solve_cs_space(alg: LieAlgebraSpec) -> CSMetricSpace:
    """All symmetric forms for which ``ad`` of the derived ideal is skew.

    Skewness is imposed on an orthonormal basis of ``[g, g]`` only, which is
    enough by linearity. The nullspace is read off an SVD with relative
    cutoff ``1e-10``. Degenerate members are not excluded: the result is a
    linear space, see :meth:`CSMetricSpace.samples`.
    """
    a = _constraint_matrix(alg)
    n_unknowns = a.shape[1]
    null = np.eye(n_unknowns)
    if a.shape[0]:
        _, s, vh = np.linalg.svd(a, full_matrices=True)
        # roundoff in the derived-ideal basis must not count as a constraint
        if s[0] > NULLSPACE_RTOL * max(1.0, float(np.max(np.abs(alg.C)))):
            rank = int(np.sum(s > NULLSPACE_RTOL * s[0]))
            null = vh[rank:].T
    basis = []
    for col in null.T:
        m = _sym_matrix(alg.dim, col)
        m[np.abs(m) < 1e-15] = 0.0
        basis.append(m)
    return CSMetricSpace(alg, tuple(basis))


def _cs_defects(alg: LieAlgebraSpec, g: np.ndarray) -> np.ndarray:
    # [[e_i, e_j], .] is ad of C[i, j, :]; stack (i, j, a, b) defects
    adm = np.einsum("ijm,mlk->ijkl", alg.C, alg.C)  # ad_{[e_i,e_j]}[k, l]
    return np.einsum("ijkl,km->ijlm", adm, g) + np.einsum("lk,ijkm->ijlm", g, adm)


def check_cs_condition(alg: LieAlgebraSpec, g) -> float:
    """Max over basis 4-tuples of ``|g([[x1,x2],y],z) + g(y,[[x1,x2],z])|``."""
    g = _as_matrix(g)
    if g.shape != (alg.dim, alg.dim):
        raise DimensionError("metric and algebra dimensions differ")
    return float(np.max(np.abs(_cs_defects(alg, g))))


def check_ad_invariance(alg: LieAlgebraSpec, g) -> float:
    """Max over basis triples of ``|g([x,y],z) - g(x,[y,z])|``."""
    g = _as_matrix(g)
    left = np.einsum("ijm,mk->ijk", alg.C, g)
    right = np.einsum("im,jkm->ijk", g, alg.C)
    return float(np.max(np.abs(left - right)))


def check_quadratic_structure_constants(alg: LieAlgebraSpec, g=None) -> float:
    """Violation of the structure-constant symmetries in a hyperbolic basis.

    The basis is assumed ordered ``(e_1..e_n, e_{n+1}..e_{2n})`` with the
    second half spanning the center. Returns the largest of

    * ``|C_ij^{n+k} - C_jk^{n+i}|`` and ``|C_ij^{n+k} + C_ik^{n+j}|``,
    * any bracket component outside ``[V, V] -> Z``,
    * if ``g`` is given, the deviation of its Gram matrix from ``[[0, I], [I, 0]]``.
    """
    d = alg.dim
    if d % 2:
        raise DimensionError("a quadratic 2-step algebra has even dimension")
    n = d // 2
    c = alg.C[:n, :n, n:]
    sym = max(
        float(np.max(np.abs(c - c.transpose(1, 2, 0)))),
        float(np.max(np.abs(c + c.transpose(0, 2, 1)))),
    )
    leak = alg.C.copy()
    leak[:n, :n, n:] = 0.0
    worst = max(sym, float(np.max(np.abs(leak))))
    if g is not None:
        g = _as_matrix(g)
        target = np.block([[np.zeros((n, n)), np.eye(n)], [np.eye(n), np.zeros((n, n))]])
        worst = max(worst, float(np.max(np.abs(g - target))))
    return worst


def riemannian_cs_exists(alg: LieAlgebraSpec) -> bool:
    """Whether a solvable algebra carries a definite Cartan-Schouten metric.

    For solvable non-abelian algebras this holds exactly when the algebra is
    2-step nilpotent; abelian algebras trivially qualify.
    """
    if not is_solvable(alg):
        raise InvariantError("criterion only applies to solvable algebras")
    return alg.nilpotency_class is not None and alg.nilpotency_class <= 2


def riemannian_cs_witness(alg: LieAlgebraSpec) -> MetricAtUnit | None:
    """Identity form as a positive definite witness, or ``None`` when none exists."""
    if not riemannian_cs_exists(alg):
        return None
    return MetricAtUnit(np.eye(alg.dim))
