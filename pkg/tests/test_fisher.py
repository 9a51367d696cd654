import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cartan_geo import (
    Discrete,
    FamilyError,
    Interval,
    ParametricFamily,
    alpha_duality_residual,
    alpha_metric_derivative_residual,
    amari_chentsov,
    bernoulli,
    builtin_family,
    categorical,
    expectation,
    fisher_matrix,
    fisher_metric_derivative,
    fisher_second_derivative_check,
    gaussian1d,
    load_custom_family,
    metric_derivative_decomposition_check,
    polynomial_family,
    reparameterize,
    score,
    score_mean_check,
    statistical_alpha_connection,
)

THETAS = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]


def constant_family():
    return ParametricFamily("constant", 1, Discrete((0, 1)), lambda x, t: np.full(np.shape(x), np.log(0.5)), -1.0, 1.0)


def truncated_exponential():
    # p(x, t) = t exp(-t x) / (1 - exp(-t)) on [0, 1], scores by finite differences
    def logp(x, t):
        return np.log(t[0]) - t[0] * x - np.log1p(-np.exp(-t[0]))

    return ParametricFamily("truncexp", 1, Interval(0.0, 1.0), logp, 0.0, np.inf)


def bernoulli_exact_moments(theta):
    """Two-atom sums written out by hand: ``(fisher, S_111, E[l'' l'])``."""
    p = {0: 1 - theta, 1: theta}
    d1 = {0: -1 / (1 - theta), 1: 1 / theta}
    d2 = {0: -1 / (1 - theta) ** 2, 1: -1 / theta**2}
    fisher = sum(p[x] * d1[x] ** 2 for x in (0, 1))
    skew = sum(p[x] * d1[x] ** 3 for x in (0, 1))
    mixed = sum(p[x] * d2[x] * d1[x] for x in (0, 1))
    return fisher, skew, mixed


# ---------------------------------------------------------------- Fisher matrix


@pytest.mark.derived
def test_bernoulli_half():
    np.testing.assert_allclose(fisher_matrix(bernoulli(), [0.5]).matrix, [[4.0]], atol=1e-14)


@pytest.mark.derived
@pytest.mark.parametrize("theta", THETAS)
def test_bernoulli_fisher_closed_form(theta):
    fisher, _, _ = bernoulli_exact_moments(theta)
    got = fisher_matrix(bernoulli(), [theta]).matrix[0, 0]
    assert got == pytest.approx(1 / (theta * (1 - theta)), abs=1e-10)
    assert got == pytest.approx(fisher, abs=1e-10)


@pytest.mark.derived
@pytest.mark.parametrize("m,s", [(0.0, 1.0), (1.5, 0.3), (-2.0, 4.0)])
def test_gaussian_fisher_closed_form(m, s):
    np.testing.assert_allclose(fisher_matrix(gaussian1d(), [m, s]).matrix, np.diag([1 / s**2, 2 / s**2]), atol=1e-6)


@pytest.mark.trivial
def test_constant_family_zero():
    fam = constant_family()
    np.testing.assert_array_equal(fisher_matrix(fam, [0.2]).matrix, [[0.0]])
    assert score_mean_check(fam, [0.2]) == 0.0
    assert fisher_second_derivative_check(fam, [0.2]) == 0.0


@pytest.mark.derived
def test_categorical_fisher():
    theta = np.array([0.2, 0.3, 0.1])
    expected = np.diag(1 / theta) + 1 / (1 - theta.sum())
    np.testing.assert_allclose(fisher_matrix(categorical(4), theta).matrix, expected, atol=1e-12)


@pytest.mark.derived
def test_interval_family_by_quadrature():
    t = 1.7
    variance = 1 / t**2 - np.exp(-t) / (1 - np.exp(-t)) ** 2
    np.testing.assert_allclose(fisher_matrix(truncated_exponential(), [t]).matrix, [[variance]], atol=1e-8)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.05, 1.0), min_size=3, max_size=3))
def test_fisher_psd_and_symmetric(raw):
    theta = 0.9 * np.array(raw) / (sum(raw) + 0.1)
    m = fisher_matrix(categorical(4), theta).matrix
    np.testing.assert_allclose(m, m.T, atol=1e-12)
    assert np.min(np.linalg.eigvalsh(m)) >= -1e-10


def test_parameter_domain_checks():
    with pytest.raises(FamilyError):
        fisher_matrix(bernoulli(), [1.0])
    with pytest.raises(FamilyError):
        fisher_matrix(bernoulli(), [0.3, 0.2])
    with pytest.raises(FamilyError):
        fisher_matrix(categorical(3), [0.6, 0.5])
    with pytest.raises(FamilyError):
        fisher_matrix(gaussian1d(), [0.0, -1.0])
    with pytest.raises(FamilyError):
        categorical(1)
    with pytest.raises(FamilyError):
        builtin_family("poisson")


def test_normalization_failure_detected():
    fam = ParametricFamily("broken", 1, Discrete((0, 1)), lambda x, t: np.zeros(np.shape(x)), 0.0, 1.0)
    with pytest.raises(FamilyError):
        fisher_matrix(fam, [0.5])


# ---------------------------------------------------------------- score identities


@pytest.mark.derived
def test_bernoulli_score_identities():
    assert score_mean_check(bernoulli(), [0.3]) <= 1e-8
    assert fisher_second_derivative_check(bernoulli(), [0.3]) <= 1e-8


@pytest.mark.derived
def test_gaussian_score_identities():
    assert score_mean_check(gaussian1d(), [0.4, 1.3]) <= 1e-6
    assert fisher_second_derivative_check(gaussian1d(), [0.4, 1.3]) <= 1e-6


def test_finite_difference_scores_match_analytic():
    analytic = bernoulli()
    numeric = ParametricFamily("bern-fd", 1, Discrete((0, 1)), analytic.log_density, 0.0, 1.0)
    x = np.array([0.0, 1.0])
    np.testing.assert_allclose(score(numeric, x, [0.3]), score(analytic, x, [0.3]), rtol=1e-9)
    np.testing.assert_allclose(fisher_matrix(numeric, [0.3]).matrix, fisher_matrix(analytic, [0.3]).matrix, rtol=1e-9)


# ---------------------------------------------------------------- Amari-Chentsov


@pytest.mark.derived
def test_amari_chentsov_bernoulli_half():
    assert amari_chentsov(bernoulli(), [0.5]).entries[0, 0, 0] == pytest.approx(0.0, abs=1e-14)


@pytest.mark.derived
def test_amari_chentsov_bernoulli_quarter():
    theta = 0.25
    _, skew, _ = bernoulli_exact_moments(theta)
    got = amari_chentsov(bernoulli(), [theta]).entries[0, 0, 0]
    assert got == pytest.approx((1 - 2 * theta) / (theta**2 * (1 - theta) ** 2), abs=1e-8)
    assert got == pytest.approx(14.2222222222222, abs=1e-8)
    assert got == pytest.approx(skew, abs=1e-10)


@pytest.mark.trivial
def test_amari_chentsov_gaussian_odd_moment():
    assert amari_chentsov(gaussian1d(), [0.3, 1.2]).entries[0, 0, 0] == pytest.approx(0.0, abs=1e-10)


# ---------------------------------------------------------------- alpha-connections


def expectation_christoffel(fam, theta, alpha, d2):
    """``E[d_i d_j l d_k l] + (1 - alpha)/2 S_ijk`` with hand-written second derivatives ``d2``."""
    t = np.asarray(theta, dtype=float)
    mixed = expectation(fam, t, lambda x: np.einsum("nij,nk->nijk", d2(x, t), score(fam, x, t)))
    return mixed + 0.5 * (1 - alpha) * amari_chentsov(fam, t).entries


def bernoulli_d2(x, t):
    return (-x / t[0] ** 2 - (1 - x) / (1 - t[0]) ** 2)[:, None, None]


def gaussian_d2(x, t):
    m, s = t
    u = x - m
    out = np.empty((x.size, 2, 2))
    out[:, 0, 0] = -1 / s**2
    out[:, 0, 1] = out[:, 1, 0] = -2 * u / s**3
    out[:, 1, 1] = 1 / s**2 - 3 * u**2 / s**4
    return out


@pytest.mark.trivial
def test_alpha_zero_is_levi_civita():
    conn = statistical_alpha_connection(bernoulli(), [0.3], 0.0)
    dmu = fisher_metric_derivative(bernoulli(), [0.3])
    np.testing.assert_allclose(conn.lowered, 0.5 * dmu, atol=1e-12)


@pytest.mark.derived
@pytest.mark.parametrize("alpha", [-1.0, -0.5, 0.0, 0.5, 1.0])
@pytest.mark.parametrize("theta", [0.2, 0.5, 0.8])
def test_bernoulli_christoffels_match_expectation_form(alpha, theta):
    got = statistical_alpha_connection(bernoulli(), [theta], alpha).lowered
    np.testing.assert_allclose(got, expectation_christoffel(bernoulli(), [theta], alpha, bernoulli_d2), atol=1e-6 * max(1, abs(got).max()))


@pytest.mark.derived
@pytest.mark.parametrize("alpha", [-1.0, 0.5, 1.0])
def test_gaussian_christoffels_match_expectation_form(alpha):
    theta = [0.3, 1.4]
    got = statistical_alpha_connection(gaussian1d(), theta, alpha).lowered
    np.testing.assert_allclose(got, expectation_christoffel(gaussian1d(), theta, alpha, gaussian_d2), atol=1e-6)


@pytest.mark.derived
@pytest.mark.parametrize("alpha", [-1.0, -0.5, 0.5, 1.0])
def test_bernoulli_duality(alpha):
    assert alpha_duality_residual(bernoulli(), [0.35], alpha) <= 1e-6


def test_alpha_pair_sums_to_twice_levi_civita():
    fam = gaussian1d()
    theta = [0.1, 0.9]
    plus = statistical_alpha_connection(fam, theta, 0.7).lowered
    minus = statistical_alpha_connection(fam, theta, -0.7).lowered
    lc = statistical_alpha_connection(fam, theta, 0.0).lowered
    np.testing.assert_allclose(plus + minus, 2 * lc, atol=1e-12)


@pytest.mark.parametrize("fam,theta", [(bernoulli(), [0.4]), (gaussian1d(), [0.2, 1.1]), (categorical(3), [0.3, 0.5])])
def test_alpha_metric_derivative(fam, theta):
    for alpha in (-1.0, 0.5, 1.0):
        assert alpha_metric_derivative_residual(fam, theta, alpha) <= 1e-6 * max(1.0, np.max(np.abs(amari_chentsov(fam, theta).entries)))


@pytest.mark.derived
@pytest.mark.parametrize("theta", THETAS)
def test_bernoulli_metric_derivative_decomposition(theta):
    assert metric_derivative_decomposition_check(bernoulli(), [theta]) <= 1e-6


def test_raised_christoffels():
    fam = gaussian1d()
    conn = statistical_alpha_connection(fam, [0.0, 1.0], 1.0)
    mu = fisher_matrix(fam, [0.0, 1.0]).matrix
    np.testing.assert_allclose(np.einsum("ijk,kl->ijl", conn.raised, mu), conn.lowered, atol=1e-10)
    assert statistical_alpha_connection(constant_family(), [0.1], 1.0).raised is None


# ---------------------------------------------------------------- reparameterization and custom families


@pytest.mark.derived
@pytest.mark.parametrize("phi", [0.3, 0.5, 0.8])
def test_bernoulli_square_pullback(phi):
    fam = reparameterize(bernoulli(), lambda p: p**2, lambda p: np.array([[2 * p[0]]]), 1, 0.0, 1.0)
    theta = phi**2
    expected = (2 * phi) ** 2 / (theta * (1 - theta))
    np.testing.assert_allclose(fisher_matrix(fam, [phi]).matrix, [[expected]], atol=1e-8)


def test_custom_family_from_json(tmp_path):
    # p(1) = sigmoid(t): the natural-parameter Bernoulli
    spec = {"atoms": [0, 1], "theta_dim": 1, "logits": [[], [{"coef": 1.0, "powers": [1]}]]}
    path = tmp_path / "logit.json"
    path.write_text(json.dumps(spec))
    fam = load_custom_family(path)
    t = 0.4
    p = 1 / (1 + np.exp(-t))
    np.testing.assert_allclose(fisher_matrix(fam, [t]).matrix, [[p * (1 - p)]], atol=1e-9)
    assert score_mean_check(fam, [t]) <= 1e-9


def test_custom_family_errors(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"atoms": [0, 1]}))
    with pytest.raises(FamilyError):
        load_custom_family(path)
    with pytest.raises(FamilyError):
        polynomial_family([0, 1], [[]], 1)
