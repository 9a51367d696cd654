"""Lie algebra kernel: structure constants, brackets and 2-step nilpotent groups.

A Lie algebra is held as a dense array ``C`` of structure constants with
``[e_i, e_j] = sum_k C[i, j, k] e_k``.  Group elements of simply connected
2-step nilpotent groups are handled in two charts:

* exponential coordinates, where the group law is the truncated
  Baker-Campbell-Hausdorff product ``a*b = a + b + [a, b]/2``;
* the Heisenberg matrix chart ``(x, y, z)`` of the upper unitriangular
  matrices, with ``(x, y, z)(x', y', z') = (x + x', y + y', z + z' + x.y')``.

Sign convention for H-type algebras
-----------------------------------
An H-type spec is given by skew matrices ``gamma[q]`` and the group law
``(x, z)(x', z') = (x + x', z + z' + <gamma x, x'>/2)`` where
``<gamma^q x, x'> = sum_{i,l} gamma[q, i, l] x_l x'_i``.  Matching this law
against the BCH product forces ``C[j, l, n + q] = -gamma[q, j, l]``; the test
suite checks it against a faithful matrix representation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .errors import ChartError, DimensionError, InvariantError, NilpotencyError

__all__ = [
    "Chart",
    "GroupPoint",
    "HTypeSpec",
    "LieAlgebraSpec",
    "OscillatorSpec",
    "ad",
    "bracket",
    "center",
    "change_basis",
    "derived_ideal",
    "derived_series",
    "exp_chart",
    "group_inverse",
    "group_product",
    "is_solvable",
    "jacobi_residual",
    "log_chart",
    "lower_central_series",
    "make_heisenberg",
    "make_htype",
    "make_oscillator",
    "make_semidirect",
    "nilpotency_class",
    "quaternionic_htype",
    "to_chart",
]

SUBSPACE_RTOL = 1e-10


def _orth(vectors: np.ndarray, rtol: float = SUBSPACE_RTOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the span of the columns of ``vectors``."""
    vectors = np.asarray(vectors, dtype=float)
    if vectors.size == 0:
        return np.zeros((vectors.shape[0], 0))
    u, s, _ = np.linalg.svd(vectors, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((vectors.shape[0], 0))
    rank = int(np.sum(s > rtol * max(s[0], 1.0)))
    return u[:, :rank]


def _null(matrix: np.ndarray, rtol: float = SUBSPACE_RTOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the right nullspace of ``matrix``."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    ncols = matrix.shape[1]
    if matrix.shape[0] == 0:
        return np.eye(ncols)
    _, s, vh = np.linalg.svd(matrix, full_matrices=True)
    if s.size == 0 or s[0] == 0.0:
        return np.eye(ncols)
    rank = int(np.sum(s > rtol * max(s[0], 1.0)))
    return vh[rank:].T.copy()


class Chart(str, Enum):
    EXPONENTIAL = "exp"
    HEISENBERG = "heis"


@dataclass(frozen=True, eq=False)
class LieAlgebraSpec:
    """Finite-dimensional real Lie algebra given by its structure constants.

    Parameters
    ----------
    structure_constants : (d, d, d) array_like
        ``C[i, j, k]`` with ``[e_i, e_j] = sum_k C[i, j, k] e_k``.
    labels : sequence of str, optional
        Basis names; defaults to ``e1 .. ed``.
    kind : str
        Constructor tag (``"heisenberg"``, ``"htype"``, ``"oscillator"``,
        ``"semidirect"`` or ``"raw"``). Charts other than the exponential
        one are only available for some kinds.
    params : mapping
        Constructor parameters kept for reporting.

    The nilpotency class is computed once at construction; it is ``None``
    for algebras that are not nilpotent.
    """

    structure_constants: np.ndarray
    labels: tuple[str, ...] = ()
    kind: str = "raw"
    params: Mapping = field(default_factory=dict)
    nilpotency_class: int | None = field(init=False)

    def __post_init__(self):
        c = np.array(self.structure_constants, dtype=float)
        if c.ndim != 3 or not (c.shape[0] == c.shape[1] == c.shape[2]) or c.shape[0] == 0:
            raise DimensionError(f"structure constants must have shape (d, d, d), got {c.shape}")
        dim = c.shape[0]
        scale = max(1.0, float(np.max(np.abs(c))))
        if np.max(np.abs(c + c.transpose(1, 0, 2))) > 1e-14 * scale:
            raise InvariantError("structure constants are not antisymmetric in (i, j)")
        jac = jacobi_residual(c)
        if jac > 1e-12 * scale**2:
            raise InvariantError(f"Jacobi identity violated (residual {jac:.3e})")
        c.flags.writeable = False
        labels = tuple(self.labels) if self.labels else tuple(f"e{i + 1}" for i in range(dim))
        if len(labels) != dim:
            raise DimensionError(f"{len(labels)} labels for a {dim}-dimensional algebra")
        object.__setattr__(self, "structure_constants", c)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "params", dict(self.params))
        object.__setattr__(self, "nilpotency_class", _compute_class(c))

    @property
    def dim(self) -> int:
        return self.structure_constants.shape[0]

    @property
    def C(self) -> np.ndarray:
        return self.structure_constants

    def is_two_step(self) -> bool:
        """True for nilpotency class 1 or 2 (derived ideal central)."""
        return self.nilpotency_class is not None and self.nilpotency_class <= 2

    def require_two_step(self):
        if not self.is_two_step():
            raise NilpotencyError(
                f"operation needs a nilpotent algebra of class <= 2 "
                f"(this one has class {self.nilpotency_class})"
            )

    def __repr__(self):
        return f"LieAlgebraSpec(kind={self.kind!r}, dim={self.dim}, class={self.nilpotency_class})"


def jacobi_residual(c: np.ndarray | LieAlgebraSpec) -> float:
    """Largest entry of the Jacobiator over all basis triples."""
    if isinstance(c, LieAlgebraSpec):
        c = c.C
    t = np.einsum("ijm,mlk->ijlk", c, c)
    jac = t + t.transpose(1, 2, 0, 3) + t.transpose(2, 0, 1, 3)
    return float(np.max(np.abs(jac))) if jac.size else 0.0


def _span_of_brackets(c: np.ndarray, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    # columns of left/right are vectors; returns orthonormal basis of span [left, right]
    if left.shape[1] == 0 or right.shape[1] == 0:
        return np.zeros((c.shape[0], 0))
    images = np.einsum("ia,jb,ijk->kab", left, right, c).reshape(c.shape[0], -1)
    return _orth(images)


def _compute_class(c: np.ndarray) -> int | None:
    dim = c.shape[0]
    current = np.eye(dim)
    full = np.eye(dim)
    k = 1
    while True:
        nxt = _span_of_brackets(c, full, current)
        if nxt.shape[1] == 0:
            return k
        if nxt.shape[1] == current.shape[1]:
            return None
        current = nxt
        k += 1


def _as_vector(alg: LieAlgebraSpec, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (alg.dim,):
        raise DimensionError(f"expected a vector of length {alg.dim}, got shape {v.shape}")
    return v


def bracket(alg: LieAlgebraSpec, x, y) -> np.ndarray:
    """Lie bracket ``[x, y]`` of two algebra vectors."""
    x = _as_vector(alg, x)
    y = _as_vector(alg, y)
    return np.einsum("i,j,ijk->k", x, y, alg.C)


def ad(alg: LieAlgebraSpec, x) -> np.ndarray:
    """Matrix of ``ad_x``, acting on column vectors: ``ad(x) @ y == [x, y]``."""
    x = _as_vector(alg, x)
    return np.einsum("i,ijk->kj", x, alg.C)


def lower_central_series(alg: LieAlgebraSpec) -> list[np.ndarray]:
    """Orthonormal bases of ``g, [g, g], [g, [g, g]], ...`` until it vanishes or stalls."""
    full = np.eye(alg.dim)
    terms = [full]
    while terms[-1].shape[1] > 0:
        nxt = _span_of_brackets(alg.C, full, terms[-1])
        if nxt.shape[1] == terms[-1].shape[1]:
            break
        terms.append(nxt)
    return terms


def derived_series(alg: LieAlgebraSpec) -> list[np.ndarray]:
    terms = [np.eye(alg.dim)]
    while terms[-1].shape[1] > 0:
        nxt = _span_of_brackets(alg.C, terms[-1], terms[-1])
        if nxt.shape[1] == terms[-1].shape[1]:
            break
        terms.append(nxt)
    return terms


def is_solvable(alg: LieAlgebraSpec) -> bool:
    return derived_series(alg)[-1].shape[1] == 0


def nilpotency_class(alg: LieAlgebraSpec) -> int | None:
    """Nilpotency class (1 for abelian); ``None`` if the algebra is not nilpotent."""
    return alg.nilpotency_class


def derived_ideal(alg: LieAlgebraSpec) -> np.ndarray:
    """Orthonormal basis (columns) of ``[g, g]``."""
    return _orth(alg.C.reshape(-1, alg.dim).T)


def center(alg: LieAlgebraSpec) -> np.ndarray:
    """Orthonormal basis (columns) of the center ``{x : [x, g] = 0}``."""
    # rows indexed by (j, k): x -> [x, e_j]_k
    m = alg.C.transpose(1, 2, 0).reshape(-1, alg.dim)
    return _null(m)


def change_basis(alg: LieAlgebraSpec, basis, labels: Sequence[str] = ()) -> LieAlgebraSpec:
    """Re-express ``alg`` in the basis given by the columns of ``basis``."""
    b = np.asarray(basis, dtype=float)
    if b.shape != (alg.dim, alg.dim):
        raise DimensionError(f"basis must be {alg.dim}x{alg.dim}")
    images = np.einsum("ia,jb,ijk->kab", b, b, alg.C).reshape(alg.dim, -1)
    coords = np.linalg.solve(b, images).reshape(alg.dim, alg.dim, alg.dim)
    c = coords.transpose(1, 2, 0)
    c = 0.5 * (c - c.transpose(1, 0, 2))
    return LieAlgebraSpec(c, labels=tuple(labels), kind="raw", params={"from": alg.kind})


# ---------------------------------------------------------------- groups


@dataclass(frozen=True, eq=False)
class GroupPoint:
    """Group element given by its coordinates in a named chart."""

    chart: Chart
    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "chart", Chart(self.chart))
        coords = np.array(self.coords, dtype=float).reshape(-1)
        coords.flags.writeable = False
        object.__setattr__(self, "coords", coords)

    @classmethod
    def identity(cls, dim: int, chart: Chart = Chart.EXPONENTIAL) -> "GroupPoint":
        return cls(chart, np.zeros(dim))


def _check_point(alg: LieAlgebraSpec, a: GroupPoint):
    if a.coords.shape != (alg.dim,):
        raise DimensionError(f"point has {a.coords.size} coordinates, group has dimension {alg.dim}")
    if a.chart is Chart.HEISENBERG and alg.kind != "heisenberg":
        raise ChartError("the Heisenberg matrix chart is only defined for Heisenberg groups")


def _heis_split(alg: LieAlgebraSpec, v: np.ndarray):
    n = (alg.dim - 1) // 2
    return v[:n], v[n : 2 * n], v[2 * n]


def group_product(alg: LieAlgebraSpec, a: GroupPoint, b: GroupPoint) -> GroupPoint:
    """Group law of the simply connected group of a class <= 2 algebra."""
    _check_point(alg, a)
    _check_point(alg, b)
    if a.chart is not b.chart:
        raise ChartError(f"chart mismatch: {a.chart.value} vs {b.chart.value}")
    alg.require_two_step()
    if a.chart is Chart.EXPONENTIAL:
        u, v = a.coords, b.coords
        return GroupPoint(Chart.EXPONENTIAL, u + v + 0.5 * bracket(alg, u, v))
    x, y, z = _heis_split(alg, a.coords)
    x2, y2, z2 = _heis_split(alg, b.coords)
    return GroupPoint(Chart.HEISENBERG, np.concatenate([x + x2, y + y2, [z + z2 + x @ y2]]))


def group_inverse(alg: LieAlgebraSpec, a: GroupPoint) -> GroupPoint:
    _check_point(alg, a)
    alg.require_two_step()
    if a.chart is Chart.EXPONENTIAL:
        return GroupPoint(Chart.EXPONENTIAL, -a.coords)
    x, y, z = _heis_split(alg, a.coords)
    return GroupPoint(Chart.HEISENBERG, np.concatenate([-x, -y, [-z + x @ y]]))


def log_chart(alg: LieAlgebraSpec, a: GroupPoint) -> np.ndarray:
    """Algebra vector ``log(a)``; the identity map in the exponential chart."""
    _check_point(alg, a)
    if a.chart is Chart.EXPONENTIAL:
        return np.array(a.coords)
    x, y, z = _heis_split(alg, a.coords)
    return np.concatenate([x, y, [z - 0.5 * (x @ y)]])


def exp_chart(alg: LieAlgebraSpec, v, chart: Chart = Chart.EXPONENTIAL) -> GroupPoint:
    """Group element ``exp(v)`` expressed in ``chart``."""
    v = _as_vector(alg, v)
    chart = Chart(chart)
    if chart is Chart.EXPONENTIAL:
        return GroupPoint(chart, v)
    if alg.kind != "heisenberg":
        raise ChartError("the Heisenberg matrix chart is only defined for Heisenberg groups")
    x, y, w = _heis_split(alg, v)
    return GroupPoint(chart, np.concatenate([x, y, [w + 0.5 * (x @ y)]]))


def to_chart(alg: LieAlgebraSpec, a: GroupPoint, chart: Chart) -> GroupPoint:
    if a.chart is Chart(chart):
        return a
    return exp_chart(alg, log_chart(alg, a), chart)


# ---------------------------------------------------------------- families


def make_heisenberg(n: int) -> LieAlgebraSpec:
    """Heisenberg algebra of dimension ``2n + 1`` with ``[e_j, e_{n+j}] = e_{2n+1}``."""
    if int(n) != n or n < 1:
        raise ValueError("Heisenberg index n must be a positive integer")
    n = int(n)
    d = 2 * n + 1
    c = np.zeros((d, d, d))
    for j in range(n):
        c[j, n + j, 2 * n] = 1.0
        c[n + j, j, 2 * n] = -1.0
    labels = [f"x{j + 1}" for j in range(n)] + [f"y{j + 1}" for j in range(n)] + ["z"]
    return LieAlgebraSpec(c, labels=tuple(labels), kind="heisenberg", params={"n": n})


@dataclass(frozen=True, eq=False)
class HTypeSpec:
    """Graded 2-step algebra ``V + Z`` with ``dim V = n``, ``dim Z = m``.

    ``gamma`` has shape ``(m, n, n)``; each ``gamma[q]`` must be skew.
    """

    n: int
    m: int
    gamma: np.ndarray

    def __post_init__(self):
        g = np.array(self.gamma, dtype=float)
        if g.shape != (self.m, self.n, self.n):
            raise DimensionError(f"gamma must have shape ({self.m}, {self.n}, {self.n}), got {g.shape}")
        scale = max(1.0, float(np.max(np.abs(g)))) if g.size else 1.0
        if g.size and np.max(np.abs(g + g.transpose(0, 2, 1))) > 1e-14 * scale:
            raise InvariantError("gamma[q] must be antisymmetric for every q")
        g.flags.writeable = False
        object.__setattr__(self, "gamma", g)

    @classmethod
    def from_entries(cls, n: int, m: int, entries) -> "HTypeSpec":
        """Build from 1-based ``(q, j, l, value)`` entries, completing antisymmetrically."""
        g = np.zeros((m, n, n))
        for e in entries:
            q, j, l, val = (e["q"], e["j"], e["l"], e["value"]) if isinstance(e, Mapping) else e
            if j == l:
                raise InvariantError(f"diagonal entry gamma[{q}][{j}][{l}] must vanish")
            g[q - 1, j - 1, l - 1] = val
            g[q - 1, l - 1, j - 1] = -val
        return cls(n, m, g)

    @property
    def dim(self) -> int:
        return self.n + self.m


def make_htype(spec: HTypeSpec) -> LieAlgebraSpec:
    n, m = spec.n, spec.m
    d = n + m
    c = np.zeros((d, d, d))
    c[:n, :n, n:] = -spec.gamma.transpose(1, 2, 0)
    labels = [f"X{j + 1}" for j in range(n)] + [f"Z{q + 1}" for q in range(m)]
    return LieAlgebraSpec(c, labels=tuple(labels), kind="htype", params={"n": n, "m": m})


def quaternionic_htype() -> HTypeSpec:
    """H-type spec ``R^4 + Im(H)`` built from left multiplication by i, j, k."""
    li = [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]]
    lj = [[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]]
    lk = [[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]]
    return HTypeSpec(4, 3, np.array([li, lj, lk], dtype=float))


@dataclass(frozen=True, eq=False)
class OscillatorSpec:
    lam: np.ndarray

    def __post_init__(self):
        lam = np.array(self.lam, dtype=float).reshape(-1)
        if lam.size == 0 or np.any(lam <= 0) or np.any(np.diff(lam) < 0):
            raise InvariantError("oscillator parameters must satisfy 0 < l_1 <= ... <= l_n")
        lam.flags.writeable = False
        object.__setattr__(self, "lam", lam)

    @property
    def n(self) -> int:
        return self.lam.size


def make_oscillator(spec: OscillatorSpec | Sequence[float]) -> LieAlgebraSpec:
    """Oscillator algebra in the basis ``(e_-1, e_0, e_1, ..., e_2n)``.

    Brackets: ``[e_j, e_{n+j}] = e_0``, ``[e_-1, e_j] = l_j e_{n+j}``,
    ``[e_-1, e_{n+j}] = -l_j e_j``.
    """
    if not isinstance(spec, OscillatorSpec):
        spec = OscillatorSpec(spec)
    n = spec.n
    d = 2 * n + 2
    c = np.zeros((d, d, d))

    def put(i, j, k, v):
        c[i, j, k] += v
        c[j, i, k] -= v

    tm1, t0 = 0, 1
    for j in range(n):
        ej, enj = 2 + j, 2 + n + j
        put(ej, enj, t0, 1.0)
        put(tm1, ej, enj, spec.lam[j])
        put(tm1, enj, ej, -spec.lam[j])
    labels = ["e-1", "e0"] + [f"e{j}" for j in range(1, 2 * n + 1)]
    return LieAlgebraSpec(c, labels=tuple(labels), kind="oscillator", params={"lambda": spec.lam.tolist()})


def make_semidirect(D) -> LieAlgebraSpec:
    """``R D x| R^n`` in the basis ``(e_0, e_1, ..., e_n)`` with ``[e_0, v] = D v``."""
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise DimensionError(f"D must be square, got shape {D.shape}")
    n = D.shape[0]
    c = np.zeros((n + 1, n + 1, n + 1))
    c[0, 1:, 1:] = D.T
    c[1:, 0, 1:] = -D.T
    labels = ["e0"] + [f"e{i + 1}" for i in range(n)]
    return LieAlgebraSpec(c, labels=tuple(labels), kind="semidirect", params={"D": D.tolist()})
