import numpy as np
import pytest
import scipy.linalg
from conftest import GradedMatrixRep, heisenberg_coords, heisenberg_matrix, htype_specs, random_htype, seeds
from hypothesis import given, settings
from hypothesis import strategies as st

from cartan_geo import (
    Chart,
    ChartError,
    DimensionError,
    GroupPoint,
    HTypeSpec,
    InvariantError,
    LieAlgebraSpec,
    NilpotencyError,
    OscillatorSpec,
    bracket,
    center,
    derived_ideal,
    exp_chart,
    group_inverse,
    group_product,
    is_solvable,
    jacobi_residual,
    log_chart,
    make_heisenberg,
    make_htype,
    make_oscillator,
    make_semidirect,
    nilpotency_class,
    quaternionic_htype,
    to_chart,
)

E = Chart.EXPONENTIAL
H = Chart.HEISENBERG


def span_equal(a, b, tol=1e-12):
    a, b = np.atleast_2d(a), np.atleast_2d(b)
    if a.shape[1] != b.shape[1]:
        return False
    return np.linalg.matrix_rank(np.hstack([a, b]), tol) == a.shape[1]


# ---------------------------------------------------------------- algebra


@pytest.mark.published
def test_heisenberg_bracket_e1_e2():
    h3 = make_heisenberg(1)
    np.testing.assert_array_equal(bracket(h3, [1, 0, 0], [0, 1, 0]), [0, 0, 1])


@pytest.mark.trivial
@given(seeds())
def test_bracket_self_vanishes(seed):
    rng = np.random.default_rng(seed)
    alg = make_htype(random_htype(rng, 3, 2))
    x = rng.standard_normal(alg.dim)
    np.testing.assert_allclose(bracket(alg, x, x), 0.0, atol=1e-14)


@pytest.mark.published
def test_oscillator_bracket_e_minus1_e1():
    osc = make_oscillator((1.0,))
    # basis (e_-1, e_0, e_1, e_2)
    np.testing.assert_array_equal(bracket(osc, [1, 0, 0, 0], [0, 0, 1, 0]), [0, 0, 0, 1])


def test_bracket_dimension_mismatch():
    with pytest.raises(DimensionError):
        bracket(make_heisenberg(1), [1, 0], [0, 1, 0])


@pytest.mark.published
def test_heisenberg_dims_and_single_bracket():
    h3 = make_heisenberg(1)
    assert h3.dim == 3
    nz = np.argwhere(h3.C != 0)
    assert {tuple(i) for i in nz} == {(0, 1, 2), (1, 0, 2)}
    assert h3.C[0, 1, 2] == 1.0


@pytest.mark.published
def test_oscillator_dimension():
    assert make_oscillator((1.0, 2.0)).dim == 6


@pytest.mark.derived
def test_semidirect_nilpotent_iff_d_squared_zero():
    alg = make_semidirect([[0.0, 1.0], [0.0, 0.0]])
    assert alg.nilpotency_class == 2
    assert make_semidirect(np.diag([1.0, 2.0])).nilpotency_class is None


def test_constructor_errors():
    with pytest.raises(InvariantError):
        OscillatorSpec([2.0, 1.0])
    with pytest.raises(InvariantError):
        OscillatorSpec([0.0])
    with pytest.raises(DimensionError):
        make_semidirect(np.zeros((2, 3)))
    with pytest.raises(InvariantError):
        HTypeSpec(2, 1, np.ones((1, 2, 2)))
    with pytest.raises(InvariantError):
        LieAlgebraSpec(np.ones((2, 2, 2)))


def test_jacobi_violation_rejected():
    c = np.zeros((3, 3, 3))
    c[0, 1, 2], c[1, 0, 2] = 1, -1
    c[1, 2, 0], c[2, 1, 0] = 1, -1
    c[0, 2, 0], c[2, 0, 0] = 1, -1
    with pytest.raises(InvariantError):
        LieAlgebraSpec(c)


@pytest.mark.published
def test_heisenberg_derived_ideal_is_center():
    h3 = make_heisenberg(1)
    assert span_equal(derived_ideal(h3), np.array([[0.0], [0.0], [1.0]]))
    assert span_equal(center(h3), np.array([[0.0], [0.0], [1.0]]))


@pytest.mark.trivial
def test_abelian_algebra():
    ab = LieAlgebraSpec(np.zeros((4, 4, 4)))
    assert derived_ideal(ab).shape[1] == 0
    assert nilpotency_class(ab) == 1
    assert ab.is_two_step()


@pytest.mark.derived
def test_oscillator_derived_ideal_and_center():
    osc = make_oscillator((1.0,))
    eye = np.eye(4)
    assert span_equal(derived_ideal(osc), eye[:, 1:4])
    assert span_equal(center(osc), eye[:, [1]])
    assert osc.nilpotency_class is None
    assert is_solvable(osc)


def test_constructors_pass_jacobi():
    rng = np.random.default_rng(3)
    algs = [
        make_heisenberg(3),
        make_htype(random_htype(rng, 4, 3)),
        make_htype(quaternionic_htype()),
        make_oscillator((1.0, 1.0, 3.0)),
        make_semidirect(rng.standard_normal((3, 3))),
    ]
    for alg in algs:
        assert jacobi_residual(alg) <= 1e-12


def test_two_step_derived_ideal_central():
    rng = np.random.default_rng(4)
    alg = make_htype(random_htype(rng, 4, 2))
    d = derived_ideal(alg)
    assert alg.nilpotency_class == 2
    for v in d.T:
        for e in np.eye(alg.dim):
            np.testing.assert_allclose(bracket(alg, v, e), 0.0, atol=1e-14)


# ---------------------------------------------------------------- group law


@pytest.mark.derived
def test_heisenberg_matrix_product():
    h3 = make_heisenberg(1)
    p = group_product(h3, GroupPoint(H, [1, 0, 0]), GroupPoint(H, [0, 1, 0]))
    np.testing.assert_array_equal(p.coords, [1, 1, 1])
    # independent: multiply the unipotent matrices
    np.testing.assert_array_equal(heisenberg_coords(heisenberg_matrix([1, 0, 0]) @ heisenberg_matrix([0, 1, 0])), [1, 1, 1])


@pytest.mark.trivial
def test_identity_left_unit():
    alg = make_htype(quaternionic_htype())
    v = np.arange(1.0, 8.0)
    np.testing.assert_array_equal(group_product(alg, GroupPoint.identity(7), GroupPoint(E, v)).coords, v)


@pytest.mark.derived
def test_htype_sign_convention_against_matrix_oracle():
    spec = HTypeSpec.from_entries(2, 1, [(1, 1, 2, 1.0)])
    alg = make_htype(spec)
    a, b = np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
    p = group_product(alg, GroupPoint(E, a), GroupPoint(E, b))
    # <gamma^q x, x'> = sum_{i,l} gamma[q][i][l] x_l x'_i
    pairing = np.einsum("il,l,i->", spec.gamma[0], a[:2], b[:2])
    np.testing.assert_allclose(p.coords[2], 0.5 * pairing, atol=1e-15)
    np.testing.assert_allclose(p.coords[2], -0.5, atol=1e-15)
    np.testing.assert_allclose(p.coords, GradedMatrixRep(alg, 2).product(a, b), atol=1e-13)


@pytest.mark.derived
def test_htype_with_minus_one_entry_is_heisenberg(h3_htype_alg):
    np.testing.assert_array_equal(h3_htype_alg.C, make_heisenberg(1).C)


@pytest.mark.derived
@settings(max_examples=40, deadline=None)
@given(htype_specs(), seeds())
def test_group_law_matches_matrix_exponentials(spec, seed):
    rng = np.random.default_rng(seed)
    alg = make_htype(spec)
    a, b = rng.standard_normal((2, alg.dim))
    p = group_product(alg, GroupPoint(E, a), GroupPoint(E, b))
    np.testing.assert_allclose(p.coords, GradedMatrixRep(alg, spec.n).product(a, b), atol=1e-11)


@settings(max_examples=50, deadline=None)
@given(htype_specs(), seeds())
def test_bch_is_exact(spec, seed):
    rng = np.random.default_rng(seed)
    alg = make_htype(spec)
    a, b = rng.standard_normal((2, alg.dim))
    p = group_product(alg, GroupPoint(E, a), GroupPoint(E, b))
    np.testing.assert_allclose(log_chart(alg, p), a + b + 0.5 * bracket(alg, a, b), atol=1e-14, rtol=0)


def test_associativity_1000_triples():
    rng = np.random.default_rng(5)
    alg = make_htype(random_htype(rng, 4, 2))
    worst = 0.0
    for _ in range(1000):
        a, b, c = (GroupPoint(E, v) for v in rng.standard_normal((3, alg.dim)))
        left = group_product(alg, group_product(alg, a, b), c)
        right = group_product(alg, a, group_product(alg, b, c))
        worst = max(worst, np.max(np.abs(left.coords - right.coords)))
    assert worst <= 1e-12


@settings(max_examples=50, deadline=None)
@given(htype_specs(), seeds())
def test_commutator_is_bracket(spec, seed):
    rng = np.random.default_rng(seed)
    alg = make_htype(spec)
    a, b = rng.standard_normal((2, alg.dim))
    pa, pb = GroupPoint(E, a), GroupPoint(E, b)
    comm = group_product(alg, group_product(alg, pa, pb), group_product(alg, group_inverse(alg, pa), group_inverse(alg, pb)))
    np.testing.assert_allclose(comm.coords, bracket(alg, a, b), atol=1e-13)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 3), seeds())
def test_chart_equivariance(n, seed):
    rng = np.random.default_rng(seed)
    alg = make_heisenberg(n)
    a, b = rng.standard_normal((2, alg.dim))
    ha, hb = exp_chart(alg, a, H), exp_chart(alg, b, H)
    via_matrix = group_product(alg, ha, hb)
    via_bch = exp_chart(alg, log_chart(alg, group_product(alg, GroupPoint(E, a), GroupPoint(E, b))), H)
    np.testing.assert_allclose(via_matrix.coords, via_bch.coords, atol=1e-13)


@pytest.mark.trivial
def test_exponential_inverse_is_negation():
    alg = make_htype(quaternionic_htype())
    v = np.linspace(-1, 1, 7)
    np.testing.assert_array_equal(group_inverse(alg, GroupPoint(E, v)).coords, -v)
    np.testing.assert_array_equal(group_inverse(alg, GroupPoint.identity(7)).coords, np.zeros(7))


@pytest.mark.derived
def test_heisenberg_matrix_inverse():
    h3 = make_heisenberg(1)
    inv = group_inverse(h3, GroupPoint(H, [1, 1, 1]))
    np.testing.assert_array_equal(inv.coords, [-1, -1, 0])
    np.testing.assert_allclose(heisenberg_coords(np.linalg.inv(heisenberg_matrix([1, 1, 1]))), [-1, -1, 0], atol=1e-15)
    ident = group_product(h3, GroupPoint(H, [1, 1, 1]), inv)
    np.testing.assert_allclose(ident.coords, 0.0, atol=1e-14)


@pytest.mark.derived
def test_heisenberg_log():
    h3 = make_heisenberg(1)
    np.testing.assert_array_equal(log_chart(h3, GroupPoint(H, [1, 1, 1])), [1, 1, 0.5])
    mat = scipy.linalg.logm(heisenberg_matrix([1, 1, 1]))
    np.testing.assert_allclose([mat[0, 1], mat[1, 2], mat[0, 2]], [1, 1, 0.5], atol=1e-14)


@pytest.mark.trivial
def test_exponential_chart_identity():
    h3 = make_heisenberg(1)
    np.testing.assert_array_equal(log_chart(h3, GroupPoint.identity(3)), np.zeros(3))
    np.testing.assert_array_equal(exp_chart(h3, np.zeros(3)).coords, np.zeros(3))


@pytest.mark.derived
def test_chart_roundtrip_1000_points():
    rng = np.random.default_rng(6)
    h5 = make_heisenberg(2)
    worst = 0.0
    for q in rng.standard_normal((1000, 5)):
        back = exp_chart(h5, log_chart(h5, GroupPoint(H, q)), H).coords
        worst = max(worst, np.max(np.abs(back - q)))
    assert worst <= 1e-15


def test_chart_errors():
    alg = make_htype(quaternionic_htype())
    with pytest.raises(ChartError):
        exp_chart(alg, np.zeros(7), H)
    h3 = make_heisenberg(1)
    with pytest.raises(ChartError):
        group_product(h3, GroupPoint(H, [0, 0, 0]), GroupPoint(E, [0, 0, 0]))
    with pytest.raises(NilpotencyError):
        group_product(make_oscillator((1.0,)), GroupPoint.identity(4), GroupPoint.identity(4))
    with pytest.raises(DimensionError):
        group_product(h3, GroupPoint(E, [0, 0]), GroupPoint(E, [0, 0, 0]))


def test_to_chart_roundtrip():
    h3 = make_heisenberg(1)
    p = GroupPoint(E, [0.3, -1.2, 2.0])
    np.testing.assert_allclose(to_chart(h3, to_chart(h3, p, H), E).coords, p.coords, atol=1e-15)


def test_immutable_coordinates():
    p = GroupPoint(E, [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        p.coords[0] = 5.0
    with pytest.raises(ValueError):
        make_heisenberg(1).C[0, 0, 0] = 1.0
