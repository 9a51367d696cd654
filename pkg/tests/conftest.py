"""Shared fixtures, strategies and independent oracles."""

from __future__ import annotations

import numpy as np
import pytest
import scipy.linalg
from hypothesis import strategies as st

from cartan_geo import HTypeSpec, LieAlgebraSpec, make_htype


def random_gamma(rng, n: int, m: int) -> np.ndarray:
    raw = rng.standard_normal((m, n, n))
    return raw - raw.transpose(0, 2, 1)


def random_htype(rng, n: int, m: int) -> HTypeSpec:
    return HTypeSpec(n, m, random_gamma(rng, n, m))


def random_symmetric(rng, d: int) -> np.ndarray:
    a = rng.standard_normal((d, d))
    return a + a.T + 2 * d * np.diag(np.sign(rng.standard_normal(d)))


def random_tritensor(rng, d: int) -> np.ndarray:
    a = rng.standard_normal((d, d, d))
    perms = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
    return sum(a.transpose(p) for p in perms) / 6.0


@st.composite
def htype_specs(draw, max_n: int = 4, max_m: int = 3):
    """Graded class-2 specs ``V + Z`` with random skew ``gamma``."""
    n = draw(st.integers(2, max_n))
    m = draw(st.integers(1, max_m))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_htype(np.random.default_rng(seed), n, m)


def seeds():
    return st.integers(0, 2**32 - 1)


class GradedMatrixRep:
    """Faithful matrix representation of a graded class-2 algebra ``V + Z``.

    One ``(n + 2)``-block per central direction ``q``::

        rho_q(x, z) = [[0, x^T C_q / 2, z_q],
                       [0,      0,        x  ],
                       [0,      0,        0  ]]

    with ``C_q[j, l] = C[j, l, n + q]``. Commutators of these blocks
    reproduce the bracket, so ``expm``/``logm`` give an oracle for the group
    law that never touches the BCH formula.
    """

    def __init__(self, alg: LieAlgebraSpec, n: int):
        self.n = n
        self.m = alg.dim - n
        self.cq = [alg.C[:n, :n, n + q] for q in range(self.m)]
        self.size = n + 2

    def rho(self, v) -> np.ndarray:
        n, s = self.n, self.size
        x, z = np.asarray(v[:n]), np.asarray(v[n:])
        out = np.zeros((self.m * s, self.m * s))
        for q, cq in enumerate(self.cq):
            b = np.zeros((s, s))
            b[0, 1 : n + 1] = 0.5 * x @ cq
            b[0, n + 1] = z[q]
            b[1 : n + 1, n + 1] = x
            out[q * s : (q + 1) * s, q * s : (q + 1) * s] = b
        return out

    def unrho(self, mat) -> np.ndarray:
        n, s = self.n, self.size
        x = mat[1 : n + 1, n + 1]
        z = np.array([mat[q * s, q * s + n + 1] for q in range(self.m)])
        return np.concatenate([x, z])

    def product(self, a, b) -> np.ndarray:
        prod = scipy.linalg.expm(self.rho(a)) @ scipy.linalg.expm(self.rho(b))
        return self.unrho(np.real(scipy.linalg.logm(prod)))


def heisenberg_matrix(q) -> np.ndarray:
    """``(n + 2)``-square unipotent matrix of a Heisenberg-chart point ``(x, y, z)``."""
    q = np.asarray(q, dtype=float)
    n = (q.size - 1) // 2
    mat = np.eye(n + 2)
    mat[0, 1 : n + 1] = q[:n]
    mat[1 : n + 1, n + 1] = q[n : 2 * n]
    mat[0, n + 1] = q[2 * n]
    return mat


def heisenberg_coords(mat) -> np.ndarray:
    n = mat.shape[0] - 2
    return np.concatenate([mat[0, 1 : n + 1], mat[1 : n + 1, n + 1], [mat[0, n + 1]]])


@pytest.fixture
def rng():
    return np.random.default_rng(20260115)


@pytest.fixture
def h3_as_htype():
    return HTypeSpec.from_entries(2, 1, [(1, 1, 2, -1.0)])


@pytest.fixture
def h3_htype_alg(h3_as_htype):
    return make_htype(h3_as_htype)
