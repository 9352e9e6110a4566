"""Continuous-time model: loss function, decay rates, and a master-equation integrator.

The loss function K1(w) = chi^2 (1 + e^{i w tau}) vanishes at w = (2m+1) pi / tau.
Combined with the Kerr ladder w_{n,n-1} = omega_a (1 + 2 beta (n-1)) this yields
photon-number-dependent dissipation: element rho[n, n-k] decays at rate
L_{n,n-k} = Re[n K1(w_{n,n-1}) + (n-k) K1*(w_{n-k,n-k-1})] per unit of tau.

Time convention: one MZI unit spans tau of physical time, so the dissipative
terms carry an explicit 1/tau while the coherent term uses the physical
frequencies. One discrete pass then matches integrating over tau.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .channel import MziParams, Trajectory
from .fock import CavityParams, DensityMatrix, HilbertSpec, energy_levels

__all__ = [
    "LossModel",
    "StabilizationReport",
    "transition_frequency",
    "loss_function_K1",
    "loss_rate",
    "stabilization_report",
    "rhs_eq2",
    "integrate",
]


@dataclass(frozen=True)
class LossModel:
    """Same knobs as MziParams, viewed by the continuous model."""

    cavity: CavityParams
    chi: float
    tau: float

    def __post_init__(self):
        if not 0.0 < self.chi < math.pi / 2:
            raise ValueError(f"chi must be in (0, pi/2), got {self.chi}")
        if not self.tau > 0.0:
            raise ValueError(f"tau must be > 0, got {self.tau}")

    @staticmethod
    def from_mzi(params: MziParams) -> "LossModel":
        return LossModel(cavity=params.cavity, chi=params.chi, tau=params.tau)

    def as_mzi(self) -> MziParams:
        return MziParams(cavity=self.cavity, chi=self.chi, tau=self.tau)


@dataclass(frozen=True)
class StabilizationReport:
    """Comb spacing pi / (omega_a beta tau) and the photon numbers with zero loss."""

    delta_n: float
    is_integer_comb: bool
    n0_solutions: list  # pairs (n0, m) with w_{n0,n0-1} tau = pi + 2 pi m


def transition_frequency(cavity: CavityParams, n: int, k: int) -> float:
    """w_{n,n-k} = (E_n - E_{n-k}) / hbar of the bare nonlinear cavity."""
    if n < 0 or k < 0 or k > n:
        raise ValueError(f"need n >= k >= 0, got n={n}, k={k}")
    omega, beta = cavity.omega_a, cavity.beta
    def level(j: float) -> float:
        return omega * (j + beta * j * (j - 1.0))
    return level(float(n)) - level(float(n - k))


def loss_function_K1(omega: float, model: LossModel) -> complex:
    """K1(w) = chi^2 (1 + e^{i w tau})."""
    return model.chi ** 2 * (1.0 + np.exp(1j * omega * model.tau))


def loss_rate(n: int, k: int, model: LossModel) -> float:
    """Decay rate (per tau) of element rho[n, n-k]; always >= 0."""
    if n < 0 or k < 0 or k > n:
        raise ValueError(f"need n >= k >= 0, got n={n}, k={k}")
    chi2 = model.chi ** 2
    omega, beta, tau = model.cavity.omega_a, model.cavity.beta, model.tau
    def half(j: int) -> float:
        if j == 0:
            return 0.0
        return j * (1.0 + math.cos(omega * tau * (1.0 + 2.0 * beta * (j - 1))))
    return chi2 * (half(n) + half(n - k))


def stabilization_report(model: LossModel, n_range: int, rel_tol: float = 1e-9) -> StabilizationReport:
    """List every n0 <= n_range whose downward transition sits on a loss zero."""
    omega, beta, tau = model.cavity.omega_a, model.cavity.beta, model.tau
    if beta == 0.0:
        delta = math.inf
        integer_comb = False
    else:
        delta = math.pi / (omega * beta * tau)
        integer_comb = abs(delta - round(delta)) <= rel_tol * max(1.0, abs(delta))
    solutions = []
    for n0 in range(n_range + 1):
        x = omega * tau * (1.0 + 2.0 * beta * (n0 - 1))
        m = round((x - math.pi) / (2.0 * math.pi))
        target = math.pi + 2.0 * math.pi * m
        if abs(x - target) <= rel_tol * max(1.0, abs(x)):
            solutions.append((n0, m))
    return StabilizationReport(delta_n=delta, is_integer_comb=integer_comb, n0_solutions=solutions)


def _elementwise_factors(model: LossModel, dim: int):
    """Constant matrices of the element-wise master equation.

    freq[n, m]   = E_n - E_m                        (coherent rotation)
    damp[n, m]   = (n K1(w1[n]) + m K1*(w1[m])) / tau
    feed[n, m]   = sqrt((n+1)(m+1)) (K1(w1[n+1]) + K1*(w1[m+1])) / tau
                   (coefficient of rho[n+1, m+1], zero on the top edge)
    """
    spec = HilbertSpec(n_max=dim - 1, leak_tol=0.5)
    energies = energy_levels(spec, model.cavity)
    n = np.arange(dim, dtype=float)
    w1 = np.empty(dim)
    w1[0] = 0.0
    w1[1:] = energies[1:] - energies[:-1]
    k1 = model.chi ** 2 * (1.0 + np.exp(1j * w1 * model.tau))
    freq = energies[:, None] - energies[None, :]
    damp = (n * k1)[:, None] + np.conj(n * k1)[None, :]
    damp = damp / model.tau
    feed = np.zeros((dim, dim), dtype=np.complex128)
    amp = np.sqrt(np.outer(n[:-1] + 1.0, n[:-1] + 1.0))
    feed[:-1, :-1] = amp * (k1[1:][:, None] + np.conj(k1[1:])[None, :]) / model.tau
    return freq, damp, feed


def rhs_eq2(rho, model: LossModel) -> np.ndarray:
    """Element-wise time derivative of the density matrix (lab frame).

    d rho[n,m] / dt = -i (E_n - E_m) rho[n,m] - damp[n,m] rho[n,m]
                      + feed[n,m] rho[n+1,m+1].

    Returned as a plain Hermitian array: a derivative, not a state.
    """
    mat = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=np.complex128)
    freq, damp, feed = _elementwise_factors(model, mat.shape[0])
    out = (-1j * freq - damp) * mat
    out[:-1, :-1] += feed[:-1, :-1] * mat[1:, 1:]
    return out


def integrate(rho0: DensityMatrix, model: LossModel, t_end: float,
              dt: float | None = None, record_every: int = 1,
              spec: HilbertSpec | None = None) -> Trajectory:
    """Fixed-step 4th-order integration of the master equation.

    The stepper works on the envelope sigma[n,m] = e^{i (E_n - E_m) t} rho[n,m],
    which removes the fast coherent rotation exactly; what remains oscillates
    at the slow Kerr detuning 2 beta omega_a (n - m), so a step of tau/20
    resolves the low diagonals and smaller steps are only needed when wide
    coherences matter. Snapshots land on multiples of record_every * tau.
    """
    tau = model.tau
    if dt is None:
        dt = tau / 20.0
    if dt > tau / 10.0:
        raise ValueError(f"dt must be <= tau/10, got dt={dt}, tau={tau}")
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    if t_end < 0:
        raise ValueError("t_end must be >= 0")

    dim = rho0.dim
    if spec is None:
        spec = HilbertSpec(n_max=dim - 1)
    elif spec.dim != dim:
        raise ValueError("rho0 dimension does not match spec")
    energies = energy_levels(spec, model.cavity)
    _, damp, feed = _elementwise_factors(model, dim)
    # envelope equation: d sigma / dt = -damp * sigma + feed * phase(t) * shift(sigma)
    # with phase[n,m](t) = e^{-i (w1[n+1] - w1[m+1]) t} = e^{-2 i beta omega (n - m) t}
    rate = 2.0 * model.cavity.beta * model.cavity.omega_a
    n = np.arange(dim)

    def rhs(sig: np.ndarray, t: float) -> np.ndarray:
        out = -damp * sig
        if dim > 1:
            p = np.exp(-1j * rate * t * n[:-1])
            out[:-1, :-1] += feed[:-1, :-1] * np.outer(p, np.conj(p)) * sig[1:, 1:]
        return out

    def to_rho(sig: np.ndarray, t: float) -> np.ndarray:
        q = np.exp(-1j * energies * t)
        mat = np.outer(q, np.conj(q)) * sig
        return 0.5 * (mat + mat.conj().T)

    interval = record_every * tau
    n_records = max(0, math.ceil(t_end / interval - 1e-12))

    sig = rho0.entries.copy()
    times = [0.0]
    states = [DensityMatrix(to_rho(sig, 0.0))]
    flags = [float(np.real(sig[-1, -1])) > spec.leak_tol]
    t_now = 0.0
    for rec in range(1, n_records + 1):
        t_target = min(rec * interval, t_end)
        span = t_target - t_now
        n_sub = max(1, round(span / dt))
        h = span / n_sub
        for _ in range(n_sub):
            k1 = rhs(sig, t_now)
            k2 = rhs(sig + 0.5 * h * k1, t_now + 0.5 * h)
            k3 = rhs(sig + 0.5 * h * k2, t_now + 0.5 * h)
            k4 = rhs(sig + h * k3, t_now + h)
            sig = sig + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t_now += h
        t_now = t_target  # pin accumulated float drift to the record grid
        times.append(t_now)
        states.append(DensityMatrix(to_rho(sig, t_now)))
        flags.append(float(np.real(sig[-1, -1])) > spec.leak_tol)

    if any(flags):
        warnings.warn(
            "truncation-edge population exceeded leak_tol during integration",
            RuntimeWarning,
            stacklevel=2,
        )
    return Trajectory(times=np.array(times), states=states, leak_flags=flags)
