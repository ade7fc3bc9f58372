"""Generalized two-point measurement statistics.

Exact outcome distributions come from composing the four maps directly
(first unsharp measurement with state update, unitary, second unsharp
measurement). The Monte Carlo layer draws trajectories sequentially from
the same pipeline; the fluctuation check compares all of this against the
joint-observable algebra, which is an independent code path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from . import _kernels
from .errors import BasisMismatchError
from .operators import SpectralHamiltonian, require_unitary
from .povm import LuedersInstrument, Povm, luders_apply

DISTRIBUTION_TOL = 1e-10


@dataclass(frozen=True)
class GibbsState:
    beta: float
    hamiltonian: SpectralHamiltonian
    probabilities: np.ndarray
    partition_function: float

    def __post_init__(self):
        self.probabilities.setflags(write=False)

    @property
    def rho(self) -> np.ndarray:
        v = self.hamiltonian.basis
        return (v * self.probabilities) @ v.conj().T

    def as_diagonal(self) -> "DiagonalState":
        return DiagonalState(probabilities=self.probabilities.copy(), basis=self.hamiltonian)


@dataclass(frozen=True)
class DiagonalState:
    """Mixture of the eigenprojectors of a reference Hamiltonian."""

    probabilities: np.ndarray
    basis: SpectralHamiltonian

    def __post_init__(self):
        p = self.probabilities
        if p.ndim != 1 or p.shape[0] != self.basis.dim:
            raise ValueError(f"need {self.basis.dim} probabilities, got shape {p.shape}")
        if np.min(p) < -1e-14 or abs(float(np.sum(p)) - 1.0) > 1e-12:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        p.setflags(write=False)

    @property
    def rho(self) -> np.ndarray:
        v = self.basis.basis
        return (v * self.probabilities) @ v.conj().T


def gibbs_state(h: SpectralHamiltonian, beta: float) -> GibbsState:
    if beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    log_z = float(logsumexp(-beta * h.energies))
    p = np.exp(-beta * h.energies - log_z)
    return GibbsState(
        beta=beta, hamiltonian=h, probabilities=p, partition_function=float(np.exp(log_z))
    )


def free_energy_difference(h_a: SpectralHamiltonian, h_b: SpectralHamiltonian, beta: float) -> float:
    """dF = -(1/beta) ln(Z_B/Z_A), computed in log space."""
    if beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    log_za = float(logsumexp(-beta * h_a.energies))
    log_zb = float(logsumexp(-beta * h_b.energies))
    return -(log_zb - log_za) / beta


def _validate_state(rho, dim: int) -> np.ndarray:
    r = np.asarray(rho, dtype=np.complex128)
    if r.shape != (dim, dim):
        raise ValueError(f"state shape {r.shape} != ({dim}, {dim})")
    if abs(float(np.trace(r).real) - 1.0) > 1e-10:
        raise ValueError("state must have unit trace")
    if float(np.min(np.linalg.eigvalsh(0.5 * (r + r.conj().T)))) < -1e-10:
        raise ValueError("state must be positive semidefinite")
    return r


def gtpm_distribution(rho, inst: LuedersInstrument, u, b_povm: Povm) -> np.ndarray:
    """Joint outcome probabilities p(a,b) = Tr[B_b U I_a(rho) U^dag]."""
    d = inst.dim
    r = _validate_state(rho, d)
    uu = require_unitary(u, name="process unitary")
    if b_povm.dim != d:
        raise ValueError(f"second POVM dim {b_povm.dim} != {d}")
    m = inst.outcomes
    p = np.empty((m, b_povm.outcomes), dtype=np.float64)
    for a in range(m):
        evolved = uu @ luders_apply(inst, a, r) @ uu.conj().T
        p[a] = np.einsum("bij,ji->b", b_povm.effects, evolved).real
    if p.min() < -1e-12 or abs(p.sum() - 1.0) > DISTRIBUTION_TOL:
        raise ArithmeticError(
            f"computed statistics fail normalization (min {p.min():.3e}, sum {p.sum():.12f})"
        )
    return p


def sample_gtpm(rho, inst: LuedersInstrument, u, b_povm: Povm, n: int, seed) -> np.ndarray:
    """Outcome counts from n sequentially simulated trajectories.

    Each trajectory draws the first outcome from Tr[A_a rho], forms the
    normalized post-measurement state, evolves it, and draws the second
    outcome. Deterministic per seed, identical across kernel backends.
    """
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    d = inst.dim
    r = _validate_state(rho, d)
    uu = require_unitary(u, name="process unitary")
    m = inst.outcomes
    nb = b_povm.outcomes
    p_first = np.empty(m)
    cond = np.empty((m, nb))
    for a in range(m):
        post = luders_apply(inst, a, r)
        pa = float(np.trace(post).real)
        p_first[a] = max(pa, 0.0)
        if pa > 1e-15:
            evolved = uu @ (post / pa) @ uu.conj().T
            row = np.einsum("bij,ji->b", b_povm.effects, evolved).real
            cond[a] = np.clip(row, 0.0, None)
            cond[a] /= cond[a].sum()
        else:
            cond[a] = 1.0 / nb  # unreachable branch, never drawn
    p_first /= p_first.sum()
    rng = np.random.default_rng(seed)
    u01 = rng.random((2, n))
    cum_first = np.cumsum(p_first)
    cum_cond = np.cumsum(cond, axis=1)
    return _kernels.sample_counts(cum_first, cum_cond, u01[0], u01[1])


def fluctuation_residual(w_obs, inst: LuedersInstrument, u, b_povm: Povm, rho_diag: DiagonalState) -> float:
    """Largest gap between joint-observable statistics and the sequential
    two-step statistics on a state diagonal in the first energy basis.

    The two pipelines share no intermediate quantities: one contracts the
    W grid with the state, the other runs measure-evolve-measure.
    """
    effects = w_obs.effects if hasattr(w_obs, "effects") else np.asarray(w_obs, dtype=np.complex128)
    if inst.hamiltonian is None:
        raise ValueError("instrument must carry its Hamiltonian to certify the basis")
    if rho_diag.basis.dim != inst.hamiltonian.dim or not np.allclose(
        rho_diag.basis.projectors, inst.hamiltonian.projectors, atol=1e-12
    ):
        raise BasisMismatchError(
            "diagonal state basis differs from the measured energy eigenbasis"
        )
    rho = rho_diag.rho
    p_joint = np.einsum("abij,ji->ab", effects, rho).real
    p_seq = gtpm_distribution(rho, inst, u, b_povm)
    if p_joint.shape != p_seq.shape:
        raise ValueError(f"grid shape {p_joint.shape} vs sequential {p_seq.shape}")
    return float(np.max(np.abs(p_joint - p_seq)))
