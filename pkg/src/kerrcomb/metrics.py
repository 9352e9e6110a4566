"""Observables: fidelity, trace distance, populations, coherences, comb weights,
frame rotations, and Wigner grids."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError
from .fock import DensityMatrix, HilbertSpec, StateVector, ladder_operators
from .states import _expm_antihermitian

__all__ = [
    "MetricSample",
    "fidelity_pure",
    "trace_distance",
    "populations",
    "coherence_sum",
    "comb_coherence_sum",
    "comb_weight",
    "parity_expectation",
    "rotate_frame",
    "fidelity_rotation_optimized",
    "wigner_grid",
]


@dataclass(frozen=True)
class MetricSample:
    """One recorded time with its named scalar observables."""

    time: float
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, val in self.values.items():
            if not math.isfinite(val):
                raise ValueError(f"metric {name} is not finite: {val}")


def _entries(rho) -> np.ndarray:
    return rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=np.complex128)


def fidelity_pure(rho, target: StateVector) -> float:
    """F = <psi| rho |psi> (probability convention)."""
    mat = _entries(rho)
    if mat.shape[0] != target.dim:
        raise DimensionMismatchError("rho and target dimensions differ")
    psi = target.amplitudes
    val = float(np.real(np.vdot(psi, mat @ psi)))
    if not -1e-9 <= val <= 1.0 + 1e-9:
        raise ValueError(f"fidelity {val} outside [0, 1] beyond tolerance")
    return min(max(val, 0.0), 1.0)


def trace_distance(rho, sigma) -> float:
    """T = (1/2) sum of absolute eigenvalues of the Hermitian difference."""
    a, b = _entries(rho), _entries(sigma)
    if a.shape != b.shape:
        raise DimensionMismatchError("density matrix dimensions differ")
    diff = a - b
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def populations(rho) -> np.ndarray:
    """p_n = rho[n, n]."""
    return np.real(np.diag(_entries(rho))).copy()


def coherence_sum(rho, k: int) -> float:
    """sum_n |rho[n, n-k]| over the k-th diagonal."""
    mat = _entries(rho)
    if not 0 <= k < mat.shape[0]:
        raise ValueError(f"k must be in [0, {mat.shape[0] - 1}], got {k}")
    return float(np.sum(np.abs(np.diagonal(mat, offset=-k))))


def comb_coherence_sum(rho, k: int, delta_n: int, offset: int = 0) -> float:
    """Like coherence_sum but restricted to rows n = offset (mod delta_n).

    This is the part of the k-th diagonal that lives on the stabilized comb;
    the unrestricted sum cannot grow under pure photon loss, while the comb
    part can absorb coherence flowing down from the lossy rows in between.
    """
    mat = _entries(rho)
    if not 0 <= k < mat.shape[0]:
        raise ValueError(f"k must be in [0, {mat.shape[0] - 1}], got {k}")
    if delta_n < 1:
        raise ValueError("delta_n must be >= 1")
    diag = np.abs(np.diagonal(mat, offset=-k))  # entry j is rho[j + k, j]
    rows = np.arange(k, mat.shape[0])
    return float(np.sum(diag[(rows - offset) % delta_n == 0]))


def comb_weight(rho, delta_n: int, offset: int = 0) -> float:
    """Total population on photon numbers n = offset (mod delta_n)."""
    if delta_n < 1:
        raise ValueError("delta_n must be >= 1")
    p = populations(rho)
    n = np.arange(p.shape[0])
    return float(np.sum(p[(n - offset) % delta_n == 0]))


def parity_expectation(rho) -> float:
    """<(-1)^n>."""
    p = populations(rho)
    signs = np.where(np.arange(p.shape[0]) % 2 == 0, 1.0, -1.0)
    return float(np.sum(signs * p))


def rotate_frame(rho: DensityMatrix, theta: float) -> DensityMatrix:
    """Conjugate by the phase-space rotation diag(e^{i theta n})."""
    phases = np.exp(1j * theta * np.arange(rho.dim))
    return DensityMatrix(rho.entries * np.outer(phases, phases.conj()))


def _rotated_fidelities(mat: np.ndarray, psi: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    n = np.arange(psi.shape[0])
    rotated = np.exp(-1j * np.outer(thetas, n)) * psi[None, :]
    return np.real(np.einsum("gi,ij,gj->g", rotated.conj(), mat, rotated))


def fidelity_rotation_optimized(rho, target: StateVector, grid: int = 720,
                                tol: float = 1e-6) -> tuple:
    """Best fidelity over global phase-space rotations of rho.

    Scans theta on a uniform grid then refines by golden-section search;
    returns (best fidelity, best theta). Never below the theta = 0 value.
    """
    mat = _entries(rho)
    if mat.shape[0] != target.dim:
        raise DimensionMismatchError("rho and target dimensions differ")
    psi = target.amplitudes
    thetas = np.linspace(0.0, 2.0 * math.pi, grid, endpoint=False)
    coarse = _rotated_fidelities(mat, psi, thetas)
    best = int(np.argmax(coarse))
    spacing = 2.0 * math.pi / grid
    lo, hi = thetas[best] - spacing, thetas[best] + spacing

    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - inv_phi * (hi - lo)
    x2 = lo + inv_phi * (hi - lo)
    f1 = _rotated_fidelities(mat, psi, np.array([x1]))[0]
    f2 = _rotated_fidelities(mat, psi, np.array([x2]))[0]
    while hi - lo > tol:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + inv_phi * (hi - lo)
            f2 = _rotated_fidelities(mat, psi, np.array([x2]))[0]
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - inv_phi * (hi - lo)
            f1 = _rotated_fidelities(mat, psi, np.array([x1]))[0]
    theta_best = 0.5 * (lo + hi)
    f_best = _rotated_fidelities(mat, psi, np.array([theta_best]))[0]
    candidates = [(float(coarse[best]), float(thetas[best])), (float(f_best), float(theta_best % (2.0 * math.pi)))]
    val, ang = max(candidates)
    return min(max(val, 0.0), 1.0), ang


def wigner_grid(rho, x_range: tuple, p_range: tuple, resolution: int):
    """Wigner function on a rectangular grid via the displaced parity operator.

    W(alpha) = (2/pi) Tr[rho D(alpha) P D(alpha)^dag] with alpha = x + i p and
    P = diag((-1)^n). Returns (W, xs, ps) with W indexed [p, x]. Integrating
    W over dx dp approximates Tr rho = 1.
    """
    mat = _entries(rho)
    dim = mat.shape[0]
    spec = HilbertSpec(n_max=dim - 1)
    a, a_dag, _ = ladder_operators(spec)
    parity = np.where(np.arange(dim) % 2 == 0, 1.0, -1.0)
    xs = np.linspace(x_range[0], x_range[1], resolution)
    ps = np.linspace(p_range[0], p_range[1], resolution)
    w = np.empty((resolution, resolution))
    for ip, p in enumerate(ps):
        for ix, x in enumerate(xs):
            alpha = x + 1j * p
            disp = _expm_antihermitian(alpha * a_dag - np.conj(alpha) * a)
            kernel = (disp * parity[None, :]) @ disp.conj().T
            w[ip, ix] = (2.0 / math.pi) * float(np.real(np.sum(mat * kernel.T)))
    return w, xs, ps
