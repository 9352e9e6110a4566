"""Truncated single-mode Fock space: state containers and core operators.

Everything is dense complex128. Dimensions stay small (tens), so clarity
wins over sparsity. All containers are immutable after construction and
all operations are pure functions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError

__all__ = [
    "HilbertSpec",
    "CavityParams",
    "StateVector",
    "DensityMatrix",
    "ladder_operators",
    "energy_levels",
    "kerr_unitary",
    "kerr_period",
    "partial_trace_b",
    "default_cutoff",
]

_HERMITICITY_TOL = 1e-12


@dataclass(frozen=True)
class HilbertSpec:
    """Fock space truncated at photon number ``n_max`` (states |0>..|n_max>).

    ``leak_tol`` is the largest population tolerated at the top level before
    an evolution flags the snapshot as leaking.
    """

    n_max: int
    leak_tol: float = 1e-8

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")
        if not 0.0 < self.leak_tol < 1.0:
            raise ValueError(f"leak_tol must be in (0, 1), got {self.leak_tol}")

    @property
    def dim(self) -> int:
        return self.n_max + 1


@dataclass(frozen=True)
class CavityParams:
    """Nonlinear cavity: H/hbar = omega_a * n + beta * omega_a * n (n - 1).

    ``beta`` is the dimensionless Kerr shift per photon pair; omega_a = 1
    sets the time unit throughout.
    """

    omega_a: float = 1.0
    beta: float = 0.0

    def __post_init__(self):
        if not self.omega_a > 0:
            raise ValueError(f"omega_a must be > 0, got {self.omega_a}")


def _frozen_array(obj, name: str, value: np.ndarray):
    value = np.array(value, dtype=np.complex128)
    value.setflags(write=False)
    object.__setattr__(obj, name, value)
    return value


@dataclass(frozen=True)
class StateVector:
    """Pure state amplitudes in the Fock basis; unit norm enforced."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen_array(self, "amplitudes", self.amplitudes)
        if amps.ndim != 1:
            raise ValueError("amplitudes must be a 1-d array")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state vector norm {norm} deviates from 1 by more than 1e-12")

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def overlap(self, other: "StateVector") -> complex:
        if other.dim != self.dim:
            raise DimensionMismatchError("state dimensions differ")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian density matrix in the Fock basis.

    Hermiticity is checked at construction; trace and positivity are checked
    on demand via :meth:`validate` because eigenvalues are not needed on the
    hot path.
    """

    entries: np.ndarray

    def __post_init__(self):
        rho = _frozen_array(self, "entries", self.entries)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("entries must be a square matrix")
        defect = np.max(np.abs(rho - rho.conj().T))
        if defect > _HERMITICITY_TOL:
            raise ValueError(f"density matrix not Hermitian: max|rho - rho^dag| = {defect:.3e}")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def trace(self) -> float:
        return float(np.real(np.trace(self.entries)))

    def validate(self, trace_tol: float = 1e-10, eig_floor: float = -1e-10) -> None:
        """Raise if trace deviates from 1 or any eigenvalue dips below the floor."""
        tr = self.trace()
        if abs(tr - 1.0) > trace_tol:
            raise ValueError(f"trace {tr} deviates from 1 by more than {trace_tol}")
        lo = float(np.min(np.linalg.eigvalsh(self.entries)))
        if lo < eig_floor:
            raise ValueError(f"minimum eigenvalue {lo:.3e} below {eig_floor:.3e}")

    @staticmethod
    def from_state(psi: StateVector) -> "DensityMatrix":
        return psi.density_matrix()


def ladder_operators(spec: HilbertSpec):
    """Return (a, a_dag, n) as dense matrices truncated at ``n_max``.

    a|n> = sqrt(n)|n-1>, a_dag|n> = sqrt(n+1)|n+1> (zero past the cutoff),
    and n = a_dag a is exactly diagonal with entries 0..n_max.
    """
    d = spec.dim
    off = np.sqrt(np.arange(1, d, dtype=float))
    a = np.diag(off, k=1).astype(np.complex128)
    a_dag = a.conj().T
    num = np.diag(np.arange(d, dtype=float)).astype(np.complex128)
    return a, a_dag, num


def energy_levels(spec: HilbertSpec, params: CavityParams) -> np.ndarray:
    """Level frequencies E_n / hbar = omega_a (n + beta n (n - 1))."""
    n = np.arange(spec.dim, dtype=float)
    return params.omega_a * (n + params.beta * n * (n - 1.0))


def kerr_unitary(spec: HilbertSpec, params: CavityParams, t: float) -> np.ndarray:
    """Diagonal free-evolution unitary exp(-i H t / hbar) of the bare cavity."""
    if not math.isfinite(t):
        raise ValueError("t must be finite")
    phases = np.exp(-1j * energy_levels(spec, params) * t)
    return np.diag(phases)


def kerr_period(params: CavityParams) -> float:
    """Recoherence period pi / (omega_a beta) of the lossless Kerr evolution."""
    if params.beta == 0.0:
        raise ValueError("kerr_period undefined for beta = 0")
    return math.pi / (params.omega_a * abs(params.beta))


def partial_trace_b(rho_ab, spec_a: HilbertSpec, spec_b: HilbertSpec) -> DensityMatrix:
    """Trace out mode b of a two-mode density matrix ordered as a (x) b.

    (rho_a)_{nm} = sum_k <n,k| rho_ab |m,k>. Trace is preserved up to
    summation roundoff.
    """
    rho = rho_ab.entries if isinstance(rho_ab, DensityMatrix) else np.asarray(rho_ab, dtype=np.complex128)
    da, db = spec_a.dim, spec_b.dim
    if rho.shape != (da * db, da * db):
        raise DimensionMismatchError(
            f"two-mode matrix has shape {rho.shape}, expected {(da * db, da * db)}"
        )
    defect = np.max(np.abs(rho - rho.conj().T))
    if defect > 1e-10:
        raise ValueError(f"input not Hermitian within 1e-10 (defect {defect:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > 1e-10:
        raise ValueError(f"input trace {tr} not within 1e-10 of 1")
    blocks = rho.reshape(da, db, da, db)
    reduced = np.einsum("ikjk->ij", blocks)
    reduced = 0.5 * (reduced + reduced.conj().T)
    return DensityMatrix(reduced)


def default_cutoff(alpha: complex) -> int:
    """Cutoff rule for coherent-family inputs: |a|^2 + 5|a| + 10, rounded up.

    Keeps top-level population below ~1e-9 for mean photon numbers in the
    10..15 range. Callers may always override.
    """
    mag = abs(alpha)
    return math.ceil(mag * mag + 5.0 * mag + 10.0)
