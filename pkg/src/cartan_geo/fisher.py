"""Fisher information, Amari-Chentsov tensors and statistical alpha-connections.

Expectations are finite weighted sums ``E f = sum_n w_n f(x_n)``: exact
atoms for discrete families, Gauss-Legendre nodes on an interval, or
Gauss-Hermite nodes centered and scaled by the family on the real line.
Scores and log-density Hessians come from analytic evaluators when the
family has them and from central differences otherwise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp

from .connections import TriTensor
from .errors import FamilyError

__all__ = [
    "AlphaConnection",
    "Discrete",
    "FisherMatrix",
    "Interval",
    "ParametricFamily",
    "RealLine",
    "alpha_duality_residual",
    "alpha_metric_derivative_residual",
    "amari_chentsov",
    "bernoulli",
    "builtin_family",
    "categorical",
    "expectation",
    "fisher_matrix",
    "fisher_metric_derivative",
    "fisher_second_derivative_check",
    "gaussian1d",
    "levi_civita_lowered",
    "load_custom_family",
    "log_density_hessian",
    "metric_derivative_decomposition_check",
    "polynomial_family",
    "reparameterize",
    "score",
    "score_mean_check",
    "statistical_alpha_connection",
]

FIRST_STEP = 1e-6
SECOND_STEP = 1e-4
NORMALIZATION_TOL = 1e-8
LEGENDRE_NODES = 200
HERMITE_NODES = 64


@dataclass(frozen=True)
class Discrete:
    atoms: tuple


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    nodes: int = LEGENDRE_NODES


@dataclass(frozen=True)
class RealLine:
    nodes: int = HERMITE_NODES


@dataclass(frozen=True, eq=False)
class ParametricFamily:
    """Family ``p(x, theta)`` with its sample space and parameter box.

    ``log_density(x, theta)`` must accept an array of sample points.
    Optional ``score_fn`` and ``hessian_fn`` return arrays of shape
    ``(len(x), k)`` and ``(len(x), k, k)``.  Real-line families supply
    ``frame(theta) -> (center, scale)`` for the Gauss-Hermite nodes;
    ``constraint(theta) -> bool`` restricts the open box further.
    """

    name: str
    theta_dim: int
    sample_space: Discrete | Interval | RealLine
    log_density: Callable
    theta_lo: np.ndarray
    theta_hi: np.ndarray
    score_fn: Callable | None = None
    hessian_fn: Callable | None = None
    frame: Callable | None = None
    constraint: Callable | None = None

    def __post_init__(self):
        lo = np.broadcast_to(np.asarray(self.theta_lo, dtype=float), (self.theta_dim,)).copy()
        hi = np.broadcast_to(np.asarray(self.theta_hi, dtype=float), (self.theta_dim,)).copy()
        object.__setattr__(self, "theta_lo", lo)
        object.__setattr__(self, "theta_hi", hi)
        if isinstance(self.sample_space, RealLine) and self.frame is None:
            raise FamilyError("real-line families need a quadrature frame")

    def check_theta(self, theta) -> np.ndarray:
        t = np.atleast_1d(np.asarray(theta, dtype=float))
        if t.shape != (self.theta_dim,):
            raise FamilyError(f"{self.name}: expected {self.theta_dim} parameters, got shape {t.shape}")
        if np.any(t <= self.theta_lo) or np.any(t >= self.theta_hi):
            raise FamilyError(f"{self.name}: theta={t.tolist()} is not interior to the parameter box")
        if self.constraint is not None and not self.constraint(t):
            raise FamilyError(f"{self.name}: theta={t.tolist()} violates the parameter constraint")
        return t


@dataclass(frozen=True, eq=False)
class FisherMatrix:
    theta: np.ndarray
    matrix: np.ndarray


@dataclass(frozen=True, eq=False)
class AlphaConnection:
    """Christoffel symbols ``lowered[i, j, k] = Gamma_{ij,k}`` and, if the metric is invertible, ``raised[i, j, k] = Gamma_ij^k``."""

    alpha: float
    lowered: np.ndarray
    raised: np.ndarray | None = field(default=None)


def _nodes(fam: ParametricFamily, theta: np.ndarray):
    """Sample points and probability weights for expectations at ``theta``."""
    space = fam.sample_space
    if isinstance(space, Discrete):
        x = np.asarray(space.atoms, dtype=float)
        w = np.exp(fam.log_density(x, theta))
    elif isinstance(space, Interval):
        t, wq = np.polynomial.legendre.leggauss(space.nodes)
        half = 0.5 * (space.hi - space.lo)
        x = half * t + 0.5 * (space.hi + space.lo)
        w = wq * half * np.exp(fam.log_density(x, theta))
    else:
        c, s = fam.frame(theta)
        t, wq = np.polynomial.hermite.hermgauss(space.nodes)
        x = c + np.sqrt(2.0) * s * t
        w = wq * np.exp(t**2 + np.log(np.sqrt(2.0) * s) + fam.log_density(x, theta))
    total = float(np.sum(w))
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise FamilyError(f"{fam.name}: probabilities sum to {total!r} at theta={theta.tolist()}")
    return x, w


def expectation(fam: ParametricFamily, theta, f: Callable) -> np.ndarray:
    """``E_theta f(x)`` for a vectorized ``f`` returning ``(len(x), ...)``."""
    t = fam.check_theta(theta)
    x, w = _nodes(fam, t)
    vals = np.asarray(f(x), dtype=float)
    return np.sum(w.reshape((-1,) + (1,) * (vals.ndim - 1)) * vals, axis=0)


def _steps(theta: np.ndarray, rel: float) -> np.ndarray:
    return rel * np.maximum(1.0, np.abs(theta))


def score(fam: ParametricFamily, x, theta) -> np.ndarray:
    """Gradient of ``log p(x, theta)`` in ``theta``; shape ``(len(x), k)``."""
    t = fam.check_theta(theta)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if fam.score_fn is not None:
        return np.asarray(fam.score_fn(x, t), dtype=float)
    h = _steps(t, FIRST_STEP)
    cols = []
    for i in range(fam.theta_dim):
        e = np.zeros(fam.theta_dim)
        e[i] = h[i]
        cols.append((fam.log_density(x, t + e) - fam.log_density(x, t - e)) / (2 * h[i]))
    return np.column_stack(cols)


def log_density_hessian(fam: ParametricFamily, x, theta) -> np.ndarray:
    """Second derivatives of ``log p(x, theta)``; shape ``(len(x), k, k)``."""
    t = fam.check_theta(theta)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if fam.hessian_fn is not None:
        return np.asarray(fam.hessian_fn(x, t), dtype=float)
    k = fam.theta_dim
    h = _steps(t, SECOND_STEP)
    f0 = fam.log_density(x, t)
    out = np.empty((x.size, k, k))
    eye = np.eye(k)
    for i in range(k):
        ei = eye[i] * h[i]
        out[:, i, i] = (fam.log_density(x, t + ei) - 2 * f0 + fam.log_density(x, t - ei)) / h[i] ** 2
        for j in range(i + 1, k):
            ej = eye[j] * h[j]
            v = (
                fam.log_density(x, t + ei + ej)
                - fam.log_density(x, t + ei - ej)
                - fam.log_density(x, t - ei + ej)
                + fam.log_density(x, t - ei - ej)
            ) / (4 * h[i] * h[j])
            out[:, i, j] = out[:, j, i] = v
    return out


def fisher_matrix(fam: ParametricFamily, theta) -> FisherMatrix:
    """``mu_ij = E[d_i log p d_j log p]``."""
    t = fam.check_theta(theta)
    m = expectation(fam, t, lambda x: np.einsum("ni,nj->nij", score(fam, x, t), score(fam, x, t)))
    return FisherMatrix(t, 0.5 * (m + m.T))


def score_mean_check(fam: ParametricFamily, theta) -> float:
    """``max_i |E[d_i log p]|``."""
    t = fam.check_theta(theta)
    return float(np.max(np.abs(expectation(fam, t, lambda x: score(fam, x, t)))))


def fisher_second_derivative_check(fam: ParametricFamily, theta) -> float:
    """``max |mu_ij + E[d_i d_j log p]|``."""
    t = fam.check_theta(theta)
    hess = expectation(fam, t, lambda x: log_density_hessian(fam, x, t))
    return float(np.max(np.abs(fisher_matrix(fam, t).matrix + hess)))


def amari_chentsov(fam: ParametricFamily, theta) -> TriTensor:
    """Third moment of the score, ``S_ijk = E[d_i l d_j l d_k l]``."""
    t = fam.check_theta(theta)
    s = expectation(fam, t, lambda x: _cube(score(fam, x, t)))
    return TriTensor.symmetrized(s)


def _cube(s: np.ndarray) -> np.ndarray:
    return np.einsum("ni,nj,nk->nijk", s, s, s)


def fisher_metric_derivative(fam: ParametricFamily, theta) -> np.ndarray:
    """``out[k, i, j] = d_k mu_ij`` by central differences of the Fisher matrix."""
    t = fam.check_theta(theta)
    h = _steps(t, FIRST_STEP)
    out = []
    for k in range(fam.theta_dim):
        e = np.zeros(fam.theta_dim)
        e[k] = h[k]
        out.append((fisher_matrix(fam, t + e).matrix - fisher_matrix(fam, t - e).matrix) / (2 * h[k]))
    return np.array(out)


def levi_civita_lowered(dmu: np.ndarray) -> np.ndarray:
    """``Gamma_{ij,k} = (d_i mu_jk + d_j mu_ik - d_k mu_ij) / 2`` from ``dmu[k, i, j]``."""
    return 0.5 * (dmu + dmu.transpose(1, 0, 2) - dmu.transpose(1, 2, 0))


def statistical_alpha_connection(fam: ParametricFamily, theta, alpha: float) -> AlphaConnection:
    """``Gamma^alpha_{ij,k} = Gamma^LC_{ij,k} - (alpha/2) S_ijk``."""
    t = fam.check_theta(theta)
    lowered = levi_civita_lowered(fisher_metric_derivative(fam, t)) - 0.5 * alpha * amari_chentsov(fam, t).entries
    mu = fisher_matrix(fam, t).matrix
    raised = None
    if np.linalg.cond(mu) < 1e12:
        raised = np.einsum("ijl,lk->ijk", lowered, np.linalg.inv(mu))
    return AlphaConnection(float(alpha), lowered, raised)


def alpha_duality_residual(fam: ParametricFamily, theta, alpha: float) -> float:
    """``max |Gamma^alpha_{ij,k} + Gamma^-alpha_{ik,j} - d_i mu_jk|``."""
    t = fam.check_theta(theta)
    dmu = fisher_metric_derivative(fam, t)
    lc = levi_civita_lowered(dmu)
    s = amari_chentsov(fam, t).entries
    plus = lc - 0.5 * alpha * s
    minus = lc + 0.5 * alpha * s
    return float(np.max(np.abs(plus + minus.transpose(0, 2, 1) - dmu)))


def alpha_metric_derivative_residual(fam: ParametricFamily, theta, alpha: float) -> float:
    """``max |(nabla^alpha mu)_kij - alpha S_kij|``."""
    t = fam.check_theta(theta)
    dmu = fisher_metric_derivative(fam, t)
    gam = levi_civita_lowered(dmu) - 0.5 * alpha * amari_chentsov(fam, t).entries
    nabla_mu = dmu - gam - gam.transpose(0, 2, 1)
    return float(np.max(np.abs(nabla_mu - alpha * amari_chentsov(fam, t).entries)))


def metric_derivative_decomposition_check(fam: ParametricFamily, theta) -> float:
    """``max |d_k mu_ij - E[d_ki l d_j l] - E[d_i l d_kj l] - S_kij|``."""
    t = fam.check_theta(theta)
    dmu = fisher_metric_derivative(fam, t)

    def terms(x):
        s = score(fam, x, t)
        h = log_density_hessian(fam, x, t)
        return np.einsum("nki,nj->nkij", h, s) + np.einsum("ni,nkj->nkij", s, h)

    pred = expectation(fam, t, terms) + amari_chentsov(fam, t).entries
    return float(np.max(np.abs(dmu - pred)))


def reparameterize(
    fam: ParametricFamily, to_theta: Callable, jacobian: Callable, dim: int, lo, hi, name: str | None = None
) -> ParametricFamily:
    """Pull ``fam`` back along ``theta = to_theta(phi)``.

    ``jacobian(phi)[a, i] = d theta_a / d phi_i``. Scores follow by the chain
    rule when ``fam`` has analytic scores; Hessians fall back to finite
    differences.
    """

    def logp(x, phi):
        return fam.log_density(x, np.asarray(to_theta(phi), dtype=float))

    sc = None
    if fam.score_fn is not None:

        def sc(x, phi):
            return fam.score_fn(x, np.asarray(to_theta(phi), dtype=float)) @ np.asarray(jacobian(phi), dtype=float)

    frame = None
    if fam.frame is not None:

        def frame(phi):
            return fam.frame(np.asarray(to_theta(phi), dtype=float))

    return ParametricFamily(name or f"{fam.name}-pullback", dim, fam.sample_space, logp, lo, hi, sc, None, frame)


# ---------------------------------------------------------------- built-ins


def bernoulli() -> ParametricFamily:
    """``p(x, t) = t^x (1 - t)^(1 - x)`` on ``{0, 1}``."""

    def logp(x, t):
        return x * np.log(t[0]) + (1 - x) * np.log1p(-t[0])

    def sc(x, t):
        return (x / t[0] - (1 - x) / (1 - t[0]))[:, None]

    def hs(x, t):
        return (-x / t[0] ** 2 - (1 - x) / (1 - t[0]) ** 2)[:, None, None]

    return ParametricFamily("bernoulli", 1, Discrete((0, 1)), logp, 0.0, 1.0, sc, hs)


def categorical(k: int) -> ParametricFamily:
    """Categorical on ``{0..k-1}`` with free parameters ``p_0..p_{k-2}``."""
    if k < 2:
        raise FamilyError("categorical family needs k >= 2")
    atoms = tuple(range(k))

    def probs(t):
        return np.append(t, 1.0 - np.sum(t))

    def logp(x, t):
        return np.log(probs(t))[x.astype(int)]

    def sc(x, t):
        p = probs(t)
        xi = x.astype(int)
        out = (xi[:, None] == np.arange(k - 1)[None, :]) / t[None, :]
        out -= (xi == k - 1)[:, None] / p[-1]
        return out

    def hs(x, t):
        p = probs(t)
        xi = x.astype(int)
        diag = (xi[:, None] == np.arange(k - 1)[None, :]) / t[None, :] ** 2
        out = -np.einsum("ni,ij->nij", diag, np.eye(k - 1))
        out -= (xi == k - 1)[:, None, None] / p[-1] ** 2 * np.ones((k - 1, k - 1))
        return out

    return ParametricFamily(
        f"categorical{k}", k - 1, Discrete(atoms), logp, 0.0, 1.0, sc, hs, constraint=lambda t: np.sum(t) < 1.0
    )


def gaussian1d() -> ParametricFamily:
    """Normal density with parameters ``(mean, standard deviation)``."""

    def logp(x, t):
        m, s = t
        return -0.5 * ((x - m) / s) ** 2 - np.log(s) - 0.5 * np.log(2 * np.pi)

    def sc(x, t):
        m, s = t
        u = x - m
        return np.column_stack([u / s**2, -1.0 / s + u**2 / s**3])

    def hs(x, t):
        m, s = t
        u = x - m
        out = np.empty((x.size, 2, 2))
        out[:, 0, 0] = -1.0 / s**2
        out[:, 0, 1] = out[:, 1, 0] = -2.0 * u / s**3
        out[:, 1, 1] = 1.0 / s**2 - 3.0 * u**2 / s**4
        return out

    return ParametricFamily(
        "gaussian1d", 2, RealLine(), logp, (-np.inf, 0.0), (np.inf, np.inf), sc, hs, frame=lambda t: (t[0], t[1])
    )


def polynomial_family(atoms: Sequence[float], logits: Sequence[Sequence[dict]], theta_dim: int, lo=-np.inf, hi=np.inf, name="custom"):
    """Discrete family with ``p(a) ~ exp(q_a(theta))`` for polynomials ``q_a``.

    ``logits[a]`` is a list of terms ``{"coef": c, "powers": [e_1, ..., e_k]}``.
    Derivatives are taken by finite differences.
    """
    if len(atoms) != len(logits):
        raise FamilyError("need one logit polynomial per atom")
    terms = []
    for poly in logits:
        coefs = np.array([float(t["coef"]) for t in poly]) if poly else np.zeros(0)
        powers = np.array([list(t.get("powers", [0] * theta_dim)) for t in poly], dtype=float).reshape(-1, theta_dim)
        terms.append((coefs, powers))
    index = {float(a): n for n, a in enumerate(atoms)}

    def logw(t):
        return np.array([np.sum(c * np.prod(t[None, :] ** p, axis=1)) if c.size else 0.0 for c, p in terms])

    def logp(x, t):
        lw = logw(t)
        lp = lw - logsumexp(lw)
        return lp[[index[float(v)] for v in np.atleast_1d(x)]]

    return ParametricFamily(name, theta_dim, Discrete(tuple(float(a) for a in atoms)), logp, lo, hi)


def load_custom_family(path) -> ParametricFamily:
    """Read a polynomial-logit family from JSON.

    Format: ``{"atoms": [...], "theta_dim": k, "logits": [[{"coef", "powers"}, ...], ...],
    "theta_lo": ..., "theta_hi": ...}``.
    """
    spec = json.loads(Path(path).read_text())
    try:
        return polynomial_family(
            spec["atoms"],
            spec["logits"],
            int(spec["theta_dim"]),
            spec.get("theta_lo", -np.inf),
            spec.get("theta_hi", np.inf),
            name=spec.get("name", Path(path).stem),
        )
    except (KeyError, TypeError) as exc:
        raise FamilyError(f"malformed family file {path}: {exc}") from exc


def builtin_family(name: str, k: int | None = None) -> ParametricFamily:
    if name == "bernoulli":
        return bernoulli()
    if name == "gaussian1d":
        return gaussian1d()
    if name == "categorical":
        if k is None:
            raise FamilyError("categorical family needs k")
        return categorical(k)
    raise FamilyError(f"unknown family {name!r}")
