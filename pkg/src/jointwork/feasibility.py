"""Feasibility search for joint measurements with prescribed marginals.

The convex program: find a grid K_ab of PSD blocks with row sums A_a,
column sums B^U_b, minimizing the mismatch of the diagonal statistics
Tr[K_ab P_k] against the square-root construction targets. Solved by
alternating projections with Dykstra corrections between the affine
constraint set (closed form, entrywise) and the product of PSD cones
(eigenvalue clipping). Two phases: first with the diagonal statistics
folded into the affine set (zero objective), then, if that stalls, with
marginals only. A stall in both phases is the infeasibility certificate;
the gap trace is returned for audit.
"""

from __future__ import annotations

import enum
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .operators import SpectralHamiltonian, haar_random_unitary, hamiltonian_from_energies
from .povm import Povm, heisenberg_povm, luders_instrument, noisy_effects

ENV_WORKERS = "JOINTWORK_WORKERS"

STALL_WINDOW = 500
STALL_SCALE = 10.0


class FeasibilityStatus(enum.Enum):
    FEASIBLE_ZERO_OBJECTIVE = "FeasibleZeroObjective"
    FEASIBLE_POSITIVE_OBJECTIVE = "FeasiblePositiveObjective"
    INFEASIBLE = "Infeasible"
    MAX_ITERATIONS = "MaxIterations"


@dataclass(frozen=True)
class FeasibilityProblem:
    """Marginal data and diagonal-statistics targets for the joint search.

    probe_basis columns define the projectors P_k used for the statistics
    constraints (the eigenbasis of the first Hamiltonian).
    """

    a_effects: np.ndarray  # (m, d, d)
    b_effects: np.ndarray  # (n, d, d)
    targets: np.ndarray  # (m, n, d, d)
    probe_basis: np.ndarray  # (d, d)

    def __post_init__(self):
        Povm(effects=self.a_effects.copy())
        Povm(effects=self.b_effects.copy())
        t = self.targets
        m, n = self.a_effects.shape[0], self.b_effects.shape[0]
        d = self.a_effects.shape[1]
        if t.shape != (m, n, d, d):
            raise ValueError(f"targets shape {t.shape} != ({m}, {n}, {d}, {d})")
        if np.max(np.abs(t - t.conj().transpose(0, 1, 3, 2))) > 1e-10:
            raise ValueError("targets must be Hermitian blocks")
        if self.probe_basis.shape != (d, d):
            raise ValueError("probe basis shape mismatch")
        for arr in (self.a_effects, self.b_effects, self.targets, self.probe_basis):
            arr.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.a_effects.shape[1]

    @property
    def probe_projectors(self) -> np.ndarray:
        v = self.probe_basis
        return np.einsum("ik,jk->kij", v, v.conj())


def joint_feasibility_problem(
    h_a: SpectralHamiltonian, h_b: SpectralHamiltonian, u, lam: float, gamma: float
) -> FeasibilityProblem:
    """Problem instance for a noisy measurement pair around a unitary.

    Visibilities may be 1 here (sharp limit): the search itself never needs
    the inverse channel, so the projective no-go case is expressible.
    """
    if not (0.0 < lam <= 1.0 and 0.0 < gamma <= 1.0):
        raise ValueError(f"visibilities must lie in (0,1], got ({lam}, {gamma})")
    a_povm = noisy_effects(h_a, lam)
    inst = luders_instrument(a_povm)
    b_heis = heisenberg_povm(noisy_effects(h_b, gamma).povm, u)
    targets = np.einsum(
        "aij,bjk,akl->abil", inst.sqrt_effects, b_heis.effects, inst.sqrt_effects
    )
    return FeasibilityProblem(
        a_effects=a_povm.effects.copy(),
        b_effects=b_heis.effects.copy(),
        targets=targets,
        probe_basis=h_a.basis.copy(),
    )


@dataclass(frozen=True)
class FeasibilityResult:
    status: FeasibilityStatus
    grid: np.ndarray  # (m, n, d, d), lab frame
    objective: float
    marginal_residual: float
    min_eigenvalue: float
    iterations: int
    gap: float
    gap_trace: np.ndarray

    def __post_init__(self):
        self.grid.setflags(write=False)
        self.gap_trace.setflags(write=False)


def _to_frame(grid, v):
    return np.einsum("ji,abjk,kl->abil", v.conj(), grid, v)


def _from_frame(grid, v):
    return np.einsum("ij,abjk,lk->abil", v, grid, v.conj())


def solve_joint_feasibility(
    problem: FeasibilityProblem,
    tol: float = 1e-7,
    max_iter: int = 20000,
    start: Optional[np.ndarray] = None,
) -> FeasibilityResult:
    """Run the two-phase projection scheme; never raises on non-convergence,
    the status field carries the verdict.

    With `start` given (lab frame) the iteration begins there; the default
    start is the target grid itself, which already satisfies the A-marginal
    and the diagonal statistics, leaving only the B-marginal and positivity
    to reconcile.
    """
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    v = problem.probe_basis
    ae = np.einsum("ji,ajk,kl->ail", v.conj(), problem.a_effects, v)
    be = np.einsum("ji,ajk,kl->ail", v.conj(), problem.b_effects, v)
    te = _to_frame(problem.targets, v)
    tdiag = np.ascontiguousarray(np.diagonal(te, axis1=2, axis2=3).real)
    if start is None:
        start_e = te.copy()
    else:
        s = np.asarray(start, dtype=np.complex128)
        if s.shape != problem.targets.shape:
            raise ValueError(f"start shape {s.shape} != {problem.targets.shape}")
        start_e = _to_frame(s, v)
    k_e, gap, iters, code, trace = _kernels.dykstra(
        ae, be, tdiag, True, start_e, tol, max_iter, STALL_WINDOW, STALL_SCALE
    )
    total = iters
    traces = [trace]
    if code == 0:
        # pinning the diagonal and matching the marginals are applied as one
        # composed step, which is a genuine projection only when the pinned
        # statistics are consistent with the marginals; a converged gap with
        # broken marginals means that consistency failed, so the pin has to
        # be dropped rather than trusted
        grid0 = _from_frame(k_e, v)
        m0 = max(
            np.max(np.abs(grid0.sum(axis=1) - problem.a_effects)),
            np.max(np.abs(grid0.sum(axis=0) - problem.b_effects)),
        )
        code = 0 if m0 <= STALL_SCALE * tol else 1
    if code == 0:
        status = FeasibilityStatus.FEASIBLE_ZERO_OBJECTIVE
    elif code == 2:
        status = FeasibilityStatus.MAX_ITERATIONS
    else:
        k_e, gap, iters2, code2, trace2 = _kernels.dykstra(
            ae, be, tdiag, False, k_e, tol, max_iter, STALL_WINDOW, STALL_SCALE
        )
        total += iters2
        traces.append(trace2)
        if code2 == 0:
            status = FeasibilityStatus.FEASIBLE_POSITIVE_OBJECTIVE
        elif code2 == 1:
            status = FeasibilityStatus.INFEASIBLE
        else:
            status = FeasibilityStatus.MAX_ITERATIONS
    objective = float(
        np.sum(np.abs(np.diagonal(k_e, axis1=2, axis2=3).real - tdiag))
    )
    grid = _from_frame(k_e, v)
    res_a = np.max(np.abs(grid.sum(axis=1) - problem.a_effects))
    res_b = np.max(np.abs(grid.sum(axis=0) - problem.b_effects))
    sym = 0.5 * (grid + grid.conj().transpose(0, 1, 3, 2))
    min_eig = float(np.min(np.linalg.eigvalsh(sym)))
    return FeasibilityResult(
        status=status,
        grid=grid,
        objective=objective,
        marginal_residual=float(max(res_a, res_b)),
        min_eigenvalue=min_eig,
        iterations=total,
        gap=float(gap),
        gap_trace=np.concatenate(traces),
    )


def _worker_count(workers: Optional[int]) -> int:
    if workers is not None:
        return max(1, workers)
    env = os.environ.get(ENV_WORKERS, "").strip()
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def estimate_critical_visibility(
    d: int,
    n_unitaries: int,
    tol: float = 1e-7,
    seed=0,
    resolution: float = 1e-3,
    max_iter: int = 20000,
    workers: Optional[int] = None,
    history: Optional[list] = None,
) -> float:
    """Empirical critical symmetric visibility by bisection over lam = gamma.

    A visibility passes when the solver certifies a zero-objective feasible
    grid for every sampled unitary; the returned value is the largest
    passing visibility at the requested resolution. A probe that exhausts
    its iteration budget counts as failing (certification, not proof).
    Appends (visibility, passed) pairs to `history` when given.
    """
    if n_unitaries < 1:
        raise ValueError(f"need at least one unitary, got {n_unitaries}")
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    h = hamiltonian_from_energies(np.arange(d, dtype=np.float64))
    rng = np.random.default_rng(seed)
    seeds = rng.integers(0, 2**63 - 1, size=n_unitaries)
    unitaries = [haar_random_unitary(d, int(s)) for s in seeds]
    n_workers = _worker_count(workers)

    def certify(u, lam):
        pr = joint_feasibility_problem(h, h, u, lam, lam)
        res = solve_joint_feasibility(pr, tol=tol, max_iter=max_iter)
        return res.status is FeasibilityStatus.FEASIBLE_ZERO_OBJECTIVE

    def passes(lam):
        if n_workers <= 1 or n_unitaries == 1:
            ok = all(certify(u, lam) for u in unitaries)
        else:
            with ThreadPoolExecutor(max_workers=n_workers) as ex:
                ok = all(ex.map(lambda u: certify(u, lam), unitaries))
        if history is not None:
            history.append((lam, ok))
        return ok

    lo, hi = 0.02, 0.98
    if not passes(lo):
        raise RuntimeError(
            f"bisection bracket broken: visibility {lo} failed to certify"
        )
    if passes(hi):
        return hi
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if passes(mid):
            lo = mid
        else:
            hi = mid
    return lo
