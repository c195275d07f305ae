import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_valid_state
from lindblad_pair.errors import DegenerateStateError, SingularKernelError, ValidationError
from lindblad_pair.state_space import (
    STATE_ORDER,
    CovarianceState,
    ambiguity_eval,
    covariances_from_ambiguity,
    density_matrix_eval,
    entanglement_test,
    gaussian_kernel,
    minimum_uncertainty_state,
    phase_space_covariance,
    reduced_density_eval,
    subsystem_metrics,
    validate_state,
    wigner_eval,
)

seeds = st.integers(0, 2**32 - 1)


def _sample_state(seed=0):
    return random_valid_state(np.random.default_rng(seed))


def test_array_round_trip_preserves_order():
    vals = np.arange(1.0, 11.0)
    s = CovarianceState.from_array(vals, tau=2.5)
    np.testing.assert_array_equal(s.as_array(), vals)
    assert [getattr(s, n) for n in STATE_ORDER] == list(vals)
    assert s.tau == 2.5


def test_from_array_rejects_wrong_shape():
    with pytest.raises(ValueError):
        CovarianceState.from_array(np.ones(9))


def test_blocks_layout():
    s = CovarianceState.from_array(np.arange(1.0, 11.0))
    a_s, b_s, c_s = s.blocks()
    np.testing.assert_array_equal(a_s, [[s.C11, s.B11], [s.B11, s.A11]])
    np.testing.assert_array_equal(b_s, [[s.C22, s.B22], [s.B22, s.A22]])
    np.testing.assert_array_equal(c_s, [[s.C12, s.B21], [s.B12, s.A12]])


def test_from_blocks_inverts_matrix_properties():
    s = _sample_state(3)
    t = CovarianceState.from_blocks(s.A, s.B, s.C)
    np.testing.assert_array_equal(t.as_array(), s.as_array())


def test_minimum_uncertainty_state_is_valid_and_saturates():
    s = minimum_uncertainty_state()
    rep = validate_state(s)
    assert rep.ok
    assert rep["heisenberg_A"].value == 0.25
    m = subsystem_metrics(s, "A")
    assert m.xi == 0.0
    assert m.d_decoh_sq == 1.0
    assert m.d_corr_sq == 0.5


def test_validate_flags_heisenberg_violation():
    s = CovarianceState(0.4, 0.0, 0.5, 0.5, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0)
    rep = validate_state(s)
    assert not rep.ok
    assert [c.name for c in rep.failed()] == ["heisenberg_A"]


def test_validate_flags_schwarz_violation():
    s = CovarianceState(0.5, 0.0, 0.5, 0.5, 0.0, 0.5, 0.0, 0.0, 0.0, 0.6)
    assert [c.name for c in validate_state(s).failed()] == ["schwarz_positions"]


def test_validate_raises_on_nan():
    s = CovarianceState(math.nan, 0.0, 0.5, 0.5, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0)
    with pytest.raises(ValidationError, match="A11"):
        validate_state(s)


def test_report_format_lists_every_check():
    text = validate_state(minimum_uncertainty_state()).format()
    assert text.count("PASS") == len(validate_state(minimum_uncertainty_state()).checks)


@given(seed=seeds)
def test_random_physical_states_validate(seed):
    assert validate_state(_sample_state(seed)).ok


@given(omega_sq=st.floats(0.25, 50.0))
def test_xi_inverts_omega_relation(omega_sq):
    s = CovarianceState(omega_sq, 0.0, 1.0, 0.5, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0)
    m = subsystem_metrics(s, "A")
    assert 0.0 <= m.xi < 1.0
    assert m.xi_in_range
    np.testing.assert_allclose((1 + m.xi) / (4 * (1 - m.xi)), omega_sq, rtol=1e-10)


def test_xi_clamped_below_uncertainty_bound():
    s = CovarianceState(0.2, 0.0, 1.0, 0.5, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0)
    m = subsystem_metrics(s, "A")
    assert m.xi == 0.0
    assert not m.xi_in_range


@pytest.mark.parametrize(
    "state",
    [
        CovarianceState(0.0, 0.0, 1.0, 0.5, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0),
        CovarianceState(1.0, 1.0, 1.0, 0.5, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0),
    ],
)
def test_degenerate_subsystem_raises(state):
    with pytest.raises(DegenerateStateError):
        subsystem_metrics(state, "A")


def test_subsystem_b_reads_b_entries():
    s = CovarianceState(0.5, 0.0, 0.5, 2.0, 0.1, 3.0, 0.0, 0.0, 0.0, 0.0)
    m = subsystem_metrics(s, "B")
    np.testing.assert_allclose(m.omega_sq, 6.0 - 0.01)
    np.testing.assert_allclose(m.d_decoh_sq, 3.0 / (2 * 5.99))


def test_entanglement_test_product_state():
    rep = entanglement_test(minimum_uncertainty_state())
    assert rep.det_cs == 0.0
    assert not rep.entangled
    assert rep.heisenberg_holds and rep.separability_holds


def test_entanglement_test_case_b_initial_data():
    s = CovarianceState(0.5, 0.0, 0.5, 0.5, 0.0, 0.5, -0.5, 0.0, 0.0, 0.5)
    rep = entanglement_test(s)
    assert rep.det_cs == -0.25
    assert rep.entangled


def test_entanglement_test_trace_term_against_explicit_product():
    s = _sample_state(11)
    J = np.array([[0.0, 1.0], [-1.0, 0.0]])
    a_s, b_s, c_s = s.blocks()
    rep = entanglement_test(s)
    tr = np.trace(a_s @ J @ c_s @ J @ b_s @ J @ c_s.T @ J)
    expected = np.linalg.det(a_s) * np.linalg.det(b_s) + (0.25 - np.linalg.det(c_s)) ** 2 - tr
    np.testing.assert_allclose(rep.heis_lhs, expected, rtol=1e-12)


@given(seed=seeds)
def test_physical_states_satisfy_bipartite_heisenberg(seed):
    assert entanglement_test(_sample_state(seed)).heisenberg_holds


@given(seed=seeds)
def test_density_matrix_is_hermitian(seed):
    s = _sample_state(seed)
    rng = np.random.default_rng(seed)
    R, r = rng.normal(size=(2, 5, 2))
    np.testing.assert_array_equal(density_matrix_eval(s, R, -r), np.conj(density_matrix_eval(s, R, r)))


def test_density_matrix_diagonal_is_normalized():
    s = _sample_state(5)
    g = np.linspace(-12, 12, 481)
    X, Y = np.meshgrid(g, g, indexing="ij")
    R = np.stack([X, Y], axis=-1)
    vals = density_matrix_eval(s, R, np.zeros(2))
    np.testing.assert_allclose(vals.imag, 0.0, atol=0.0)
    total = vals.real.sum() * (g[1] - g[0]) ** 2
    np.testing.assert_allclose(total, 1.0, atol=1e-8)


def test_density_matrix_broadcasts_scalar_point():
    s = _sample_state(6)
    v = density_matrix_eval(s, [0.1, -0.2], [0.3, 0.4])
    assert isinstance(v, complex)
    np.testing.assert_allclose(v, density_matrix_eval(s, np.array([[0.1, -0.2]]), np.array([[0.3, 0.4]]))[0])


def test_singular_kernel_raises():
    s = CovarianceState(0.5, 0.0, 1.0, 0.5, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0)
    with pytest.raises(SingularKernelError):
        gaussian_kernel(s)


def test_ambiguity_at_origin_is_one():
    assert ambiguity_eval(_sample_state(1), np.zeros(2), np.zeros(2)) == 1.0


def _fourier_density(s, R, grid):
    # rho(R, r) = (2 pi)^-2 int d^2Q exp(-i Q.R) amb(Q, r), by the trapezoid rule
    Q1, Q2 = np.meshgrid(grid, grid, indexing="ij")
    Q = np.stack([Q1, Q2], axis=-1)
    dq = grid[1] - grid[0]

    def rho(r):
        amb = ambiguity_eval(s, Q, np.broadcast_to(r, Q.shape))
        return np.sum(np.exp(-1j * (Q1 * R[0] + Q2 * R[1])) * amb) * dq * dq / (2 * np.pi) ** 2

    return rho


@pytest.mark.parametrize("seed", [0, 7, 21])
def test_density_matches_fourier_transform_of_ambiguity(seed):
    s = _sample_state(seed)
    grid = np.linspace(-14, 14, 561)
    rng = np.random.default_rng(seed + 100)
    for _ in range(3):
        R, r = rng.normal(scale=0.6, size=(2, 2))
        expected = _fourier_density(s, R, grid)(r)
        np.testing.assert_allclose(density_matrix_eval(s, R, r), expected, atol=1e-6)


@pytest.mark.parametrize("seed", [2, 9])
def test_wigner_matches_fourier_oracle(seed):
    # f(R, p) = int d^2r exp(-i p.r) rho(R, r); rho itself from the closed-form kernel
    s = _sample_state(seed)
    g = np.linspace(-12, 12, 481)
    r1, r2 = np.meshgrid(g, g, indexing="ij")
    r = np.stack([r1, r2], axis=-1)
    dr = g[1] - g[0]
    rng = np.random.default_rng(seed)
    for _ in range(3):
        R, p = rng.normal(scale=0.6, size=(2, 2))
        rho = density_matrix_eval(s, np.broadcast_to(R, r.shape), r)
        expected = np.sum(np.exp(-1j * (p[0] * r1 + p[1] * r2)) * rho) * dr * dr
        np.testing.assert_allclose(wigner_eval(s, R, p), expected.real, atol=1e-6)
        np.testing.assert_allclose(expected.imag, 0.0, atol=1e-6)


def test_wigner_normalization_on_4d_grid():
    s = _sample_state(4)
    sigma = phase_space_covariance(s)
    sd = np.sqrt(np.diag(sigma))
    axes = [np.linspace(-8 * w, 8 * w, 41) for w in sd]
    mesh = np.meshgrid(*axes, indexing="ij")
    R = np.stack(mesh[:2], axis=-1)
    p = np.stack(mesh[2:], axis=-1)
    vol = np.prod([a[1] - a[0] for a in axes])
    total = wigner_eval(s, R, p).sum() * vol / (2 * np.pi) ** 2
    np.testing.assert_allclose(total, 1.0, atol=1e-4)


@given(seed=seeds)
def test_phase_space_covariance_is_physical(seed):
    # Sigma + i Omega / 2 >= 0 for the symplectic form over (R1, R2, p1, p2)
    sigma = phase_space_covariance(_sample_state(seed))
    omega = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
    np.testing.assert_array_equal(sigma, sigma.T)
    assert np.linalg.eigvalsh(sigma + 0.5j * omega).min() >= -1e-12


def test_wigner_rejects_non_positive_covariance():
    s = CovarianceState(0.5, 0.0, 0.5, 0.5, 0.0, 0.5, 0.0, 0.0, 0.0, 0.5)
    with pytest.raises(SingularKernelError):
        wigner_eval(s, np.zeros(2), np.zeros(2))


@pytest.mark.parametrize("which, idx", [("A", 0), ("B", 1)])
def test_reduced_density_is_partial_trace(which, idx):
    s = _sample_state(13)
    g = np.linspace(-12, 12, 961)
    other = np.zeros((g.size, 2))
    other[:, 1 - idx] = g
    Rc, rc = 0.3, -0.4
    R = other.copy()
    R[:, idx] = Rc
    r = np.zeros_like(R)
    r[:, idx] = rc
    traced = density_matrix_eval(s, R, r).sum() * (g[1] - g[0])
    np.testing.assert_allclose(reduced_density_eval(s, which, Rc, rc), traced, atol=1e-10)


@pytest.mark.parametrize("seed", range(5))
def test_covariances_from_ambiguity_recovers_state(seed):
    s = random_valid_state(np.random.default_rng(seed), scale=0.8)
    rec = covariances_from_ambiguity(lambda Q, r: ambiguity_eval(s, Q, r))
    np.testing.assert_allclose(rec.as_array(), s.as_array(), atol=1e-6)


def test_covariances_from_ambiguity_distinguishes_b12_from_b21():
    s = CovarianceState(0.5, 0.0, 0.5, 0.5, 0.0, 0.5, 0.0, 0.2, -0.1, 0.0)
    rec = covariances_from_ambiguity(lambda Q, r: ambiguity_eval(s, Q, r))
    np.testing.assert_allclose([rec.B12, rec.B21], [0.2, -0.1], atol=1e-7)
