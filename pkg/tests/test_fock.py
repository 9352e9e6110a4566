import math

import numpy as np
import pytest

from kerrcomb.errors import DimensionMismatchError
from kerrcomb.fock import (
    CavityParams,
    DensityMatrix,
    HilbertSpec,
    StateVector,
    default_cutoff,
    kerr_period,
    kerr_unitary,
    ladder_operators,
    partial_trace_b,
)


def test_hilbert_spec_validation():
    spec = HilbertSpec(5)
    assert spec.dim == 6
    with pytest.raises(ValueError):
        HilbertSpec(0)
    with pytest.raises(ValueError):
        HilbertSpec(5, leak_tol=0.0)
    with pytest.raises(ValueError):
        HilbertSpec(5, leak_tol=1.5)


def test_cavity_params_validation():
    with pytest.raises(ValueError):
        CavityParams(omega_a=0.0)
    CavityParams(1.0, -0.1)  # negative Kerr allowed


def test_ladder_operators_minimal():
    a, a_dag, num = ladder_operators(HilbertSpec(1))
    np.testing.assert_allclose(a, np.array([[0, 1], [0, 0]], dtype=complex))
    np.testing.assert_allclose(a_dag, a.conj().T)
    np.testing.assert_allclose(num, np.diag([0.0, 1.0]))


def test_number_operator_eigenvalues():
    spec = HilbertSpec(7)
    _, _, num = ladder_operators(spec)
    for n in range(spec.dim):
        e = np.zeros(spec.dim)
        e[n] = 1.0
        np.testing.assert_allclose(num @ e, n * e, atol=1e-14)


def test_truncated_commutator_corner():
    spec = HilbertSpec(6)
    a, a_dag, _ = ladder_operators(spec)
    comm = a @ a_dag - a_dag @ a
    expected = np.eye(spec.dim, dtype=complex)
    expected[-1, -1] = -spec.n_max
    np.testing.assert_allclose(comm, expected, atol=1e-13)


def test_kerr_unitary_vacuum_and_unitarity():
    spec = HilbertSpec(9)
    params = CavityParams(1.0, 3e-3)
    u = kerr_unitary(spec, params, 17.3)
    assert abs(u[0, 0] - 1.0) < 1e-15
    np.testing.assert_allclose(u @ u.conj().T, np.eye(spec.dim), atol=1e-14)


def test_kerr_period_reduces_to_linear_rotation():
    spec = HilbertSpec(12)
    params = CavityParams(1.0, 2.5e-3)
    t = kerr_period(params)
    u = kerr_unitary(spec, params, t)
    n = np.arange(spec.dim)
    linear = np.diag(np.exp(-1j * params.omega_a * n * t))
    np.testing.assert_allclose(u, linear, atol=1e-10)


def test_kerr_phase_after_one_unit():
    # omega_a = 1, beta = 2.5e-3, t = 200 pi: level 2 sits at
    # E_2 = 2 + 2 beta = 2.005, so the phase is e^{-i 401 pi} = -1.
    spec = HilbertSpec(4)
    u = kerr_unitary(spec, CavityParams(1.0, 2.5e-3), 200.0 * math.pi)
    assert abs(u[2, 2] - (-1.0)) < 1e-10


def test_kerr_phases_add():
    spec = HilbertSpec(8)
    params = CavityParams(1.0, 0.07)
    u1 = kerr_unitary(spec, params, 1.3)
    u2 = kerr_unitary(spec, params, 2.9)
    u12 = kerr_unitary(spec, params, 4.2)
    np.testing.assert_allclose(u1 @ u2, u12, atol=1e-12)


def test_state_vector_norm_enforced():
    with pytest.raises(ValueError):
        StateVector(np.array([1.0, 1.0], dtype=complex))
    psi = StateVector(np.array([1.0, 0.0], dtype=complex))
    assert psi.dim == 2
    rho = psi.density_matrix()
    assert rho.trace() == pytest.approx(1.0)


def test_density_matrix_hermiticity_enforced():
    bad = np.array([[1.0, 1.0], [0.0, 0.0]], dtype=complex)
    with pytest.raises(ValueError):
        DensityMatrix(bad)


def test_partial_trace_product_state():
    spec_a, spec_b = HilbertSpec(3), HilbertSpec(2)
    rng = np.random.default_rng(7)
    v = rng.normal(size=spec_a.dim) + 1j * rng.normal(size=spec_a.dim)
    v /= np.linalg.norm(v)
    rho_a = np.outer(v, v.conj())
    vac_b = np.zeros((spec_b.dim, spec_b.dim), dtype=complex)
    vac_b[0, 0] = 1.0
    joint = np.kron(rho_a, vac_b)
    out = partial_trace_b(joint, spec_a, spec_b)
    np.testing.assert_allclose(out.entries, rho_a, atol=1e-13)


def test_partial_trace_bell_pair():
    spec = HilbertSpec(1)
    psi = np.zeros(4, dtype=complex)
    psi[0] = psi[3] = 1.0 / math.sqrt(2)  # (|0,0> + |1,1>)/sqrt(2)
    out = partial_trace_b(np.outer(psi, psi.conj()), spec, spec)
    np.testing.assert_allclose(out.entries, 0.5 * np.eye(2), atol=1e-14)


def _random_density(rng, dim):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = m @ m.conj().T
    return rho / np.trace(rho)


def test_partial_trace_preserves_trace_randomized():
    spec_a, spec_b = HilbertSpec(4), HilbertSpec(3)
    rng = np.random.default_rng(11)
    for _ in range(100):
        rho = _random_density(rng, spec_a.dim * spec_b.dim)
        out = partial_trace_b(rho, spec_a, spec_b)
        assert abs(out.trace() - 1.0) < 1e-12
        assert np.max(np.abs(out.entries - out.entries.conj().T)) < 1e-12


def test_partial_trace_linearity():
    spec_a, spec_b = HilbertSpec(3), HilbertSpec(3)
    rng = np.random.default_rng(3)
    r1 = _random_density(rng, spec_a.dim * spec_b.dim)
    r2 = _random_density(rng, spec_a.dim * spec_b.dim)
    c1, c2 = 0.3, 0.7
    lhs = partial_trace_b(c1 * r1 + c2 * r2, spec_a, spec_b).entries
    rhs = (c1 * partial_trace_b(r1, spec_a, spec_b).entries
           + c2 * partial_trace_b(r2, spec_a, spec_b).entries)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_partial_trace_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        partial_trace_b(np.eye(10) / 10.0, HilbertSpec(2), HilbertSpec(2))


def test_default_cutoff_rule():
    assert default_cutoff(math.sqrt(10)) == 36
    assert default_cutoff(0) == 10
