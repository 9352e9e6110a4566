"""Factories for the input, target, and steady states used by the experiments."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CutoffTooSmallError
from .fock import DensityMatrix, HilbertSpec, StateVector, ladder_operators

__all__ = [
    "SqueezeParam",
    "CatSpec",
    "coherent",
    "squeezed_vacuum",
    "displaced_squeezed",
    "cat",
    "i_cat",
    "phase_state",
    "mixed_coherent_pair",
    "displacement_operator",
    "squeeze_operator",
]

MAX_SQUEEZE = 3.0


@dataclass(frozen=True)
class SqueezeParam:
    """Squeezing parameter z of exp((z* a^2 - z a_dag^2) / 2)."""

    z: complex

    def __post_init__(self):
        if not math.isfinite(abs(self.z)):
            raise ValueError("z must be finite")
        if abs(self.z) > MAX_SQUEEZE:
            raise ValueError(f"|z| = {abs(self.z)} exceeds supported maximum {MAX_SQUEEZE}")


@dataclass(frozen=True)
class CatSpec:
    """Ring of ``legs`` coherent states of amplitude ``alpha``."""

    alpha: complex
    legs: int

    def __post_init__(self):
        if self.legs < 1:
            raise ValueError(f"legs must be >= 1, got {self.legs}")


def _expm_antihermitian(gen: np.ndarray) -> np.ndarray:
    """exp(G) for anti-Hermitian G, via eigendecomposition of -iG."""
    herm = -1j * gen
    w, v = np.linalg.eigh(herm)
    return (v * np.exp(1j * w)) @ v.conj().T


def _check_edge_leak(raw_edge_pop: float, spec: HilbertSpec, what: str) -> None:
    if raw_edge_pop > spec.leak_tol:
        raise CutoffTooSmallError(
            f"{what}: population {raw_edge_pop:.3e} at n = {spec.n_max} "
            f"exceeds leak_tol {spec.leak_tol:.1e}; raise n_max"
        )


def coherent(alpha: complex, spec: HilbertSpec) -> StateVector:
    """Coherent state |alpha>, renormalized on the truncated space.

    Amplitudes are built in log space, so mean photon numbers well past ten
    do not overflow intermediate factorials.
    """
    d = spec.dim
    amps = np.zeros(d, dtype=np.complex128)
    if alpha == 0:
        amps[0] = 1.0
        return StateVector(amps)
    n = np.arange(d, dtype=float)
    log_fact = np.array([math.lgamma(k + 1.0) for k in range(d)])
    mag = abs(alpha)
    log_mag = n * math.log(mag) - 0.5 * log_fact - 0.5 * mag * mag
    phase = np.angle(complex(alpha))
    amps = np.exp(log_mag) * np.exp(1j * phase * n)
    _check_edge_leak(float(abs(amps[-1]) ** 2), spec, f"coherent(|alpha|={mag:.4g})")
    amps /= np.linalg.norm(amps)
    return StateVector(amps)


def squeeze_operator(z, spec: HilbertSpec) -> np.ndarray:
    """Dense matrix exp((z* a^2 - z a_dag^2) / 2) on the truncated space."""
    zval = z.z if isinstance(z, SqueezeParam) else complex(z)
    SqueezeParam(zval)  # bounds check
    a, a_dag, _ = ladder_operators(spec)
    gen = 0.5 * (np.conj(zval) * (a @ a) - zval * (a_dag @ a_dag))
    return _expm_antihermitian(gen)

def displacement_operator(alpha: complex, spec: HilbertSpec) -> np.ndarray:
    """Dense matrix exp(alpha a_dag - alpha* a) on the truncated space."""
    a, a_dag, _ = ladder_operators(spec)
    gen = alpha * a_dag - np.conj(alpha) * a
    return _expm_antihermitian(gen)


def squeezed_vacuum(z, spec: HilbertSpec) -> StateVector:
    """Squeezed vacuum with even photon parity; odd amplitudes are pinned to zero."""
    amps = squeeze_operator(z, spec)[:, 0].copy()
    amps[1::2] = 0.0  # generator couples only even sectors
    edge = max(float(abs(amps[-1]) ** 2), float(abs(amps[-2]) ** 2))
    _check_edge_leak(edge, spec, "squeezed_vacuum")
    amps /= np.linalg.norm(amps)
    return StateVector(amps)


def displaced_squeezed(alpha: complex, z, spec: HilbertSpec) -> StateVector:
    """Displaced squeezed state D(alpha) S(z) |0>."""
    amps = displacement_operator(alpha, spec) @ squeezed_vacuum(z, spec).amplitudes
    _check_edge_leak(float(abs(amps[-1]) ** 2), spec, "displaced_squeezed")
    amps /= np.linalg.norm(amps)
    return StateVector(amps)


def cat(spec_c: CatSpec, spec: HilbertSpec) -> StateVector:
    """Normalized ring superposition sum_j |alpha e^{2 pi i j / legs}>.

    Normalization comes from the norm of the summed truncated amplitudes,
    i.e. the exact Gram matrix of the legs, not the large-alpha shortcut.
    Populations vanish except on n = 0 (mod legs).
    """
    legs = spec_c.legs
    total = np.zeros(spec.dim, dtype=np.complex128)
    for j in range(legs):
        leg = complex(spec_c.alpha) * np.exp(2j * math.pi * j / legs)
        total += coherent(leg, spec).amplitudes
    total /= np.linalg.norm(total)
    return StateVector(total)


def i_cat(alpha: complex, spec: HilbertSpec) -> StateVector:
    """The parity-free state |i alpha> + i |-i alpha> produced by bare Kerr evolution."""
    amps = coherent(1j * alpha, spec).amplitudes + 1j * coherent(-1j * alpha, spec).amplitudes
    amps /= np.linalg.norm(amps)
    return StateVector(amps)


def phase_state(big_n: int, spec: HilbertSpec) -> StateVector:
    """Uniform superposition (N+1)^{-1/2} sum_{s=0}^{N} |s>."""
    if big_n > spec.n_max:
        raise ValueError(f"phase_state needs N <= n_max, got N={big_n}, n_max={spec.n_max}")
    amps = np.zeros(spec.dim, dtype=np.complex128)
    amps[: big_n + 1] = 1.0 / math.sqrt(big_n + 1.0)
    return StateVector(amps)


def mixed_coherent_pair(alpha: complex, spec: HilbertSpec) -> DensityMatrix:
    """Statistical mixture (|alpha><alpha| + |-alpha><-alpha|) / 2."""
    plus = coherent(alpha, spec).amplitudes
    minus = coherent(-alpha, spec).amplitudes
    rho = 0.5 * (np.outer(plus, plus.conj()) + np.outer(minus, minus.conj()))
    return DensityMatrix(rho)
