"""Discrete-time nonlinear dissipation: one MZI unit compiled to a Kraus channel.

One unit is beamsplitter -> Kerr evolution for tau -> identical beamsplitter,
with the auxiliary mode fed vacuum and traced out afterwards. The generator
i chi (a_dag b + a b_dag) conserves total photon number, so with the b-mode
cutoff equal to the a-mode cutoff the compiled single-mode Kraus operators
are exact for every retained state: M_k moves |n> to |n-k> and nothing else.

That structure makes the channel act independently on each density-matrix
diagonal, which the evolution loop exploits; the dense Kraus path is kept as
the reference implementation.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .fock import CavityParams, DensityMatrix, HilbertSpec, energy_levels

__all__ = [
    "MziParams",
    "KrausSet",
    "Trajectory",
    "beamsplitter_unitary",
    "kraus_from_mzi",
    "apply_channel",
    "evolve_exact",
    "update_rule_step",
    "evolve_update_rule",
    "update_rule_factors",
]

CHI_PERTURBATIVE_MAX = 0.1


@dataclass(frozen=True)
class MziParams:
    """Physical knobs of one MZI unit: cavity (omega_a, beta), mixing angle chi,
    and Kerr interaction time tau. One unit advances time by tau."""

    cavity: CavityParams
    chi: float
    tau: float

    def __post_init__(self):
        if not 0.0 < self.chi < math.pi / 2:
            raise ValueError(f"chi must be in (0, pi/2), got {self.chi}")
        if not self.tau > 0.0:
            raise ValueError(f"tau must be > 0, got {self.tau}")


@dataclass(frozen=True)
class KrausSet:
    """Single-mode Kraus operators {M_k}; M_k removes k photons into the bus.

    ``amplitudes[k, n]`` holds <n-k| M_k |n>, the only nonzero entry of M_k
    in column n. Completeness sum_k M_k^dag M_k = I holds on every column
    because the auxiliary mode is not truncated below the input mode.
    """

    operators: list
    amplitudes: np.ndarray
    spec: HilbertSpec
    params: MziParams

    def completeness_defect(self) -> float:
        """max_n |1 - sum_k |<n-k|M_k|n>|^2|."""
        col = np.sum(np.abs(self.amplitudes) ** 2, axis=0)
        return float(np.max(np.abs(col - 1.0)))


@dataclass(frozen=True)
class Trajectory:
    """Recorded snapshots of an evolution; times are strictly increasing."""

    times: np.ndarray
    states: list
    leak_flags: list

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", t)
        if len(self.states) != t.shape[0] or len(self.leak_flags) != t.shape[0]:
            raise ValueError("times, states and leak_flags must have equal length")
        if t.shape[0] > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("times must be strictly increasing")

    @property
    def final(self) -> DensityMatrix:
        return self.states[-1]


def beamsplitter_unitary(chi: float, dim_a: int, dim_b: int) -> np.ndarray:
    """Two-mode unitary exp(i chi (a_dag b + a b_dag)), basis ordered a (x) b.

    Built block by block: the generator conserves n_a + n_b, so each total-n
    block is a real symmetric tridiagonal matrix, exponentiated by
    eigendecomposition. Blocks clipped by either cutoff are exponentiated on
    the clipped subspace, which keeps the result unitary.
    """
    if dim_a < 2 or dim_b < 2:
        raise ValueError("dims must be >= 2")
    dim = dim_a * dim_b
    u = np.zeros((dim, dim), dtype=np.complex128)
    for total in range(dim_a + dim_b - 1):
        na_min = max(0, total - (dim_b - 1))
        na_max = min(dim_a - 1, total)
        size = na_max - na_min + 1
        idx = np.array([na * dim_b + (total - na) for na in range(na_min, na_max + 1)])
        block = np.zeros((size, size))
        for row in range(size - 1):
            na = na_min + row
            nb = total - na
            # a b_dag : (na, nb) -> (na - 1, nb + 1) has amplitude sqrt(na (nb + 1));
            # here stored as the coupling between consecutive rows (na, na + 1).
            block[row, row + 1] = block[row + 1, row] = math.sqrt((na + 1) * (total - na))
        w, v = np.linalg.eigh(block)
        u_block = (v * np.exp(1j * chi * w)) @ v.T
        u[np.ix_(idx, idx)] = u_block
    return u


def _kraus_amplitudes(params: MziParams, spec: HilbertSpec) -> np.ndarray:
    """Amplitude table F[k, n] = <n-k, k| U_bs (Kerr (x) I) U_bs |n, 0>.

    Computed per total-photon block: with the b mode starting in vacuum the
    input |n, 0> only explores the block of total number n, whose states all
    fit below both cutoffs.
    """
    d = spec.dim
    energies = energy_levels(spec, params.cavity)
    table = np.zeros((d, d), dtype=np.complex128)
    table[0, 0] = np.exp(-1j * energies[0] * params.tau)  # vacuum block is 1x1
    for total in range(1, d):
        size = total + 1  # j = n_b = 0..total, n_a = total - j
        block = np.zeros((size, size))
        for j in range(size - 1):
            block[j, j + 1] = block[j + 1, j] = math.sqrt((total - j) * (j + 1))
        w, v = np.linalg.eigh(block)
        u_bs = (v * np.exp(1j * params.chi * w)) @ v.T
        kerr = np.exp(-1j * energies[total - np.arange(size)] * params.tau)
        table[:size, total] = (u_bs * kerr[None, :]) @ u_bs[:, 0]
    return table


def kraus_from_mzi(params: MziParams, spec: HilbertSpec) -> KrausSet:
    """Compile one MZI unit into single-mode Kraus operators M_0..M_{n_max}."""
    d = spec.dim
    table = _kraus_amplitudes(params, spec)
    ops = []
    for k in range(d):
        mk = np.zeros((d, d), dtype=np.complex128)
        cols = np.arange(k, d)
        mk[cols - k, cols] = table[k, cols]
        ops.append(mk)
    return KrausSet(operators=ops, amplitudes=table, spec=spec, params=params)


def apply_channel(rho: DensityMatrix, kraus: KrausSet) -> DensityMatrix:
    """rho -> sum_k M_k rho M_k^dag, re-symmetrized against roundoff drift."""
    mat = rho.entries
    out = np.zeros_like(mat)
    for mk in kraus.operators:
        out += mk @ mat @ mk.conj().T
    out = 0.5 * (out + out.conj().T)
    return DensityMatrix(out)


def _transfer_matrices_exact(table: np.ndarray) -> list:
    """Per-diagonal one-step maps of the exact channel.

    For the lower diagonal d (element rho[s+d, s]) one step reads
    u'[s] = sum_k F[k, s+d+k] conj(F[k, s+k]) u[s+k]: an upper-triangular
    banded contraction. Column-wise |.|^2 completeness makes every map
    1-norm bounded by 1, so long products stay stable.
    """
    d = table.shape[0]
    transfers = []
    for diag in range(d):
        size = d - diag
        t = np.zeros((size, size), dtype=np.complex128)
        for k in range(size):
            src = np.arange(size - k)  # s values with s + k in range
            t[src, src + k] = table[k, src + diag + k] * np.conj(table[k, src + k])
        transfers.append(t)
    return transfers


def _rho_to_diagonals(mat: np.ndarray) -> list:
    d = mat.shape[0]
    return [np.ascontiguousarray(np.diagonal(mat, offset=-k)) for k in range(d)]


def _diagonals_to_rho(diags: list) -> np.ndarray:
    d = len(diags)
    mat = np.zeros((d, d), dtype=np.complex128)
    rows = np.arange(d)
    mat[rows, rows] = diags[0]
    for k in range(1, d):
        idx = np.arange(d - k)
        mat[idx + k, idx] = diags[k]
        mat[idx, idx + k] = np.conj(diags[k])
    return mat


def _evolve_by_diagonals(transfers, rho0: DensityMatrix, spec: HilbertSpec,
                         n_steps: int, record_every: int, tau: float) -> Trajectory:
    """Shared stepping engine for the exact channel and the update rule.

    Both models act independently on each diagonal, and the diagonal maps are
    constant in time, so the steps between snapshots are applied as one
    precomputed matrix power per diagonal. Hermiticity is structural: only
    the lower diagonals are evolved and the upper half is their conjugate.
    """
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    diags = _rho_to_diagonals(rho0.entries)

    times = [0.0]
    states = [DensityMatrix(_diagonals_to_rho(diags))]
    leaked = float(np.real(diags[0][-1])) > spec.leak_tol
    flags = [leaked]

    jumps = None
    step = 0
    while step < n_steps:
        width = min(record_every, n_steps - step)
        if width == record_every:
            if jumps is None:
                jumps = [np.linalg.matrix_power(t, record_every) for t in transfers]
            maps = jumps
        else:
            maps = [np.linalg.matrix_power(t, width) for t in transfers]
        diags = [m @ v for m, v in zip(maps, diags)]
        step += width
        times.append(step * tau)
        states.append(DensityMatrix(_diagonals_to_rho(diags)))
        edge = float(np.real(diags[0][-1]))
        flags.append(edge > spec.leak_tol)
        leaked = leaked or flags[-1]

    if leaked:
        warnings.warn(
            f"truncation-edge population exceeded leak_tol {spec.leak_tol:.1e} during evolution",
            RuntimeWarning,
            stacklevel=3,
        )
    return Trajectory(times=np.array(times), states=states, leak_flags=flags)


def evolve_exact(rho0: DensityMatrix, params: MziParams, spec: HilbertSpec,
                 n_steps: int, record_every: int = 1,
                 kraus: KrausSet | None = None) -> Trajectory:
    """Run ``n_steps`` MZI units, recording a snapshot every ``record_every``.

    The Kraus set is compiled once and reused; timestamps are j * tau with
    one unit per tau.
    """
    if rho0.dim != spec.dim:
        raise ValueError("rho0 dimension does not match spec")
    if kraus is None:
        kraus = kraus_from_mzi(params, spec)
    transfers = _transfer_matrices_exact(kraus.amplitudes)
    return _evolve_by_diagonals(transfers, rho0, spec, n_steps, record_every, params.tau)


def update_rule_factors(params: MziParams, dim: int):
    """Elementwise decay and gain factors of the small-chi update rule.

    One pass maps rho[n, m] to decay[n, m] * rho[n, m] +
    gain[n, m] * rho[n+1, m+1], with

      decay[n, m] = e^{-i w_nm tau} (1 - chi^2 (n + n e^{i w1[n] tau}
                    + m + m e^{-i w1[m] tau}))
      gain[n, m]  = e^{-i w_{n+1,m+1} tau} chi^2 sqrt((n+1)(m+1))
                    (1 + e^{i w1[n+1] tau}) (1 + e^{-i w1[m+1] tau})

    where w1[n] = E_n - E_{n-1} and w_nm = E_n - E_m. Valid to O(chi^2); the
    remainder versus the exact channel scales as chi^3.
    """
    spec = HilbertSpec(n_max=dim - 1, leak_tol=0.5)
    energies = energy_levels(spec, params.cavity)
    tau, chi2 = params.tau, params.chi ** 2
    n = np.arange(dim, dtype=float)
    w1 = np.empty(dim)
    w1[0] = 0.0  # multiplied by n = 0, value irrelevant
    w1[1:] = energies[1:] - energies[:-1]
    loss_n = n * (1.0 + np.exp(1j * w1 * tau))  # n (1 + e^{i w_{n,n-1} tau})
    w_nm = energies[:, None] - energies[None, :]
    decay = np.exp(-1j * w_nm * tau) * (1.0 - chi2 * (loss_n[:, None] + np.conj(loss_n)[None, :]))
    gain = np.zeros((dim, dim), dtype=np.complex128)
    sub = np.exp(-1j * w_nm[1:, 1:] * tau)
    amp = np.sqrt(np.outer(n[:-1] + 1.0, n[:-1] + 1.0))
    one_plus = 1.0 + np.exp(1j * w1[1:] * tau)
    gain[:-1, :-1] = sub * chi2 * amp * np.outer(one_plus, np.conj(one_plus))
    return decay, gain


def _warn_chi(params: MziParams) -> None:
    if params.chi > CHI_PERTURBATIVE_MAX:
        warnings.warn(
            f"update rule assumes chi << 1; chi = {params.chi} exceeds {CHI_PERTURBATIVE_MAX}",
            RuntimeWarning,
            stacklevel=3,
        )


def update_rule_step(rho: DensityMatrix, params: MziParams) -> DensityMatrix:
    """One pass of the perturbative update rule applied to every diagonal."""
    _warn_chi(params)
    decay, gain = update_rule_factors(params, rho.dim)
    mat = rho.entries
    out = decay * mat
    out[:-1, :-1] += gain[:-1, :-1] * mat[1:, 1:]
    out = 0.5 * (out + out.conj().T)
    return DensityMatrix(out)


def _transfer_matrices_update(params: MziParams, dim: int) -> list:
    decay, gain = update_rule_factors(params, dim)
    transfers = []
    for diag in range(dim):
        size = dim - diag
        s = np.arange(size)
        t = np.zeros((size, size), dtype=np.complex128)
        t[s, s] = decay[s + diag, s]
        if size > 1:
            t[s[:-1], s[:-1] + 1] = gain[s[:-1] + diag, s[:-1]]
        transfers.append(t)
    return transfers


def evolve_update_rule(rho0: DensityMatrix, params: MziParams, spec: HilbertSpec,
                       n_steps: int, record_every: int = 1) -> Trajectory:
    """Evolve with the perturbative update rule; same interface as evolve_exact."""
    if rho0.dim != spec.dim:
        raise ValueError("rho0 dimension does not match spec")
    _warn_chi(params)
    transfers = _transfer_matrices_update(params, spec.dim)
    return _evolve_by_diagonals(transfers, rho0, spec, n_steps, record_every, params.tau)
