import math

import numpy as np
import pytest

from kerrcomb.errors import DimensionMismatchError
from kerrcomb.fock import DensityMatrix, HilbertSpec, StateVector
from kerrcomb.states import CatSpec, cat, coherent, phase_state
from kerrcomb.metrics import (
    MetricSample,
    comb_coherence_sum,
    comb_weight,
    coherence_sum,
    fidelity_pure,
    fidelity_rotation_optimized,
    parity_expectation,
    populations,
    rotate_frame,
    trace_distance,
    wigner_grid,
)


def fock_dm(n, dim):
    rho = np.zeros((dim, dim), dtype=complex)
    rho[n, n] = 1.0
    return DensityMatrix(rho)


def basis_state(n, dim):
    v = np.zeros(dim, dtype=complex)
    v[n] = 1.0
    return StateVector(v)


def random_density(rng, dim):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = m @ m.conj().T
    return DensityMatrix(rho / np.trace(rho))


def test_fidelity_pure_examples():
    psi = StateVector(np.array([1.0, 1.0], dtype=complex) / math.sqrt(2))
    assert fidelity_pure(psi.density_matrix(), psi) == pytest.approx(1.0)
    assert fidelity_pure(fock_dm(0, 2), basis_state(1, 2)) == pytest.approx(0.0, abs=1e-15)
    mixed = DensityMatrix(0.5 * np.eye(2, dtype=complex))
    assert fidelity_pure(mixed, psi) == pytest.approx(0.5)
    with pytest.raises(DimensionMismatchError):
        fidelity_pure(fock_dm(0, 3), psi)


def test_trace_distance_examples():
    rho = fock_dm(0, 3)
    assert trace_distance(rho, rho) == pytest.approx(0.0, abs=1e-15)
    assert trace_distance(fock_dm(0, 2), fock_dm(1, 2)) == pytest.approx(1.0)
    half = DensityMatrix(np.diag([0.5, 0.5]).astype(complex))
    assert trace_distance(fock_dm(0, 2), half) == pytest.approx(0.5)


def test_trace_distance_triangle_inequality():
    rng = np.random.default_rng(13)
    for _ in range(25):
        a, b, c = (random_density(rng, 6) for _ in range(3))
        assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-9


def test_populations_and_coherences():
    rho = fock_dm(3, 6)
    p = populations(rho)
    assert p[3] == 1.0
    for k in range(1, 6):
        assert coherence_sum(rho, k) == 0.0

    spec = HilbertSpec(22)
    coh = coherent(1.0, spec).density_matrix()
    assert coherence_sum(coh, 2) > 0.0

    two_cat = cat(CatSpec(2.0, 2), spec).density_matrix()
    assert coherence_sum(two_cat, 1) < 1e-12
    assert coherence_sum(two_cat, 2) > 0.0

    with pytest.raises(ValueError):
        coherence_sum(rho, 6)


def test_comb_coherence_restriction():
    spec = HilbertSpec(15)
    coh = coherent(1.3, spec).density_matrix()
    total = coherence_sum(coh, 2)
    even = comb_coherence_sum(coh, 2, 2, 0)
    odd = comb_coherence_sum(coh, 2, 2, 1)
    assert even + odd == pytest.approx(total, rel=1e-12)


def test_comb_weight():
    spec = HilbertSpec(22)
    rho = coherent(1.1, spec).density_matrix()
    assert comb_weight(rho, 1) == pytest.approx(1.0, abs=1e-10)

    two_cat = cat(CatSpec(2.2, 2), spec).density_matrix()
    assert comb_weight(two_cat, 2, 0) == pytest.approx(1.0, abs=1e-10)

    ps = phase_state(11, HilbertSpec(12)).density_matrix()
    assert comb_weight(ps, 4, 0) == pytest.approx(0.25, abs=1e-12)

    total = sum(comb_weight(rho, 3, off) for off in range(3))
    assert total == pytest.approx(rho.trace(), abs=1e-10)


def test_parity_expectation():
    spec = HilbertSpec(30)
    even = cat(CatSpec(2.0, 2), spec).density_matrix()
    assert parity_expectation(even) == pytest.approx(1.0, abs=1e-10)


def test_rotate_frame_identity_and_cat_symmetry():
    spec = HilbertSpec(30)
    rho = cat(CatSpec(2.0, 2), spec).density_matrix()
    np.testing.assert_allclose(rotate_frame(rho, 0.0).entries, rho.entries, atol=1e-15)
    # a two-legged cat maps to itself under a pi rotation
    np.testing.assert_allclose(rotate_frame(rho, math.pi).entries, rho.entries, atol=1e-10)


def test_rotation_optimized_dominates_unrotated():
    spec = HilbertSpec(25)
    psi = cat(CatSpec(1.8, 2), spec)
    rho = rotate_frame(psi.density_matrix(), 0.41)
    plain = fidelity_pure(rho, psi)
    best, theta = fidelity_rotation_optimized(rho, psi)
    assert best >= plain
    assert best == pytest.approx(1.0, abs=1e-8)
    # recovered angle undoes the applied rotation modulo the cat symmetry
    assert min(abs(theta - t) for t in (math.pi - 0.41, 2 * math.pi - 0.41)) < 1e-4


def test_fidelity_rotation_invariance():
    spec = HilbertSpec(20)
    rng = np.random.default_rng(7)
    rho = random_density(rng, spec.dim)
    psi = coherent(1.4, spec)
    base = fidelity_pure(rho, psi)
    for theta in (0.3, 1.2, 4.0):
        rotated_rho = rotate_frame(rho, theta)
        rotated_psi = StateVector(np.exp(1j * theta * np.arange(spec.dim)) * psi.amplitudes)
        assert fidelity_pure(rotated_rho, rotated_psi) == pytest.approx(base, abs=1e-12)


def test_wigner_known_values():
    vac = fock_dm(0, 31)
    w, xs, ps = wigner_grid(vac, (-3, 3), (-3, 3), 31)
    center = w[15, 15]
    assert abs(center - 2.0 / math.pi) < 1e-3

    one = fock_dm(1, 31)
    w1, _, _ = wigner_grid(one, (-1, 1), (-1, 1), 11)
    assert abs(w1[5, 5] + 2.0 / math.pi) < 1e-3


def test_wigner_normalization():
    vac = fock_dm(0, 31)
    w, xs, ps = wigner_grid(vac, (-3, 3), (-3, 3), 41)
    integral = w.sum() * (xs[1] - xs[0]) * (ps[1] - ps[0])
    assert abs(integral - 1.0) < 0.02


def test_wigner_cat_fringes_alternate():
    spec = HilbertSpec(40)
    rho = cat(CatSpec(math.sqrt(10), 2), spec).density_matrix()
    w, _, ps = wigner_grid(rho, (0.0, 1e-4), (-1.0, 1.0), 41)
    col = w[:, 0]
    signs = np.sign(col[np.abs(col) > 1e-3])
    changes = int(np.sum(signs[1:] != signs[:-1]))
    assert changes >= 4


def test_metric_sample_rejects_nonfinite():
    MetricSample(0.0, {"fidelity": 0.5})
    with pytest.raises(ValueError):
        MetricSample(0.0, {"fidelity": float("nan")})
