import numpy as np
import pytest

from jointwork.bloch import symmetric_critical_visibility
from jointwork.feasibility import (
    FeasibilityProblem,
    FeasibilityStatus,
    estimate_critical_visibility,
    joint_feasibility_problem,
    solve_joint_feasibility,
)
from jointwork.operators import haar_random_unitary, hamiltonian_from_energies

HAD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)


def _qubit_problem(lam, gam=None, u=HAD):
    h = hamiltonian_from_energies([0.0, 1.0])
    return joint_feasibility_problem(h, h, u, lam, lam if gam is None else gam)


def test_problem_validation():
    h = hamiltonian_from_energies([0.0, 1.0])
    good = _qubit_problem(0.6)
    with pytest.raises(ValueError):
        joint_feasibility_problem(h, h, HAD, 0.0, 0.5)
    with pytest.raises(ValueError):
        joint_feasibility_problem(h, h, HAD, 0.5, 1.5)
    bad_targets = good.targets.copy()
    bad_targets[0, 0, 0, 1] += 1.0  # breaks hermiticity
    with pytest.raises(ValueError):
        FeasibilityProblem(
            a_effects=good.a_effects.copy(),
            b_effects=good.b_effects.copy(),
            targets=bad_targets,
            probe_basis=good.probe_basis.copy(),
        )


def test_sharp_visibility_is_expressible():
    # lam = gamma = 1 encodes the projective pair even though the analytic
    # construction itself stops short of that point
    prob = _qubit_problem(1.0)
    assert prob.dim == 2


def test_feasible_below_the_bound(warm_kernels):
    lam = symmetric_critical_visibility(2) - 0.05
    res = solve_joint_feasibility(_qubit_problem(lam))
    assert res.status is FeasibilityStatus.FEASIBLE_ZERO_OBJECTIVE
    assert res.objective <= 1e-6
    assert res.marginal_residual < 1e-6
    assert res.min_eigenvalue > -1e-7
    grid = res.grid
    assert np.allclose(grid, grid.conj().transpose(0, 1, 3, 2), atol=1e-10)
    # marginals of the returned grid reproduce both effect families
    assert np.max(np.abs(grid.sum(axis=1) - _qubit_problem(lam).a_effects)) < 1e-6


def test_warm_start_short_circuits(warm_kernels):
    lam = 0.6
    prob = _qubit_problem(lam)
    first = solve_joint_feasibility(prob)
    again = solve_joint_feasibility(prob, start=first.grid)
    assert again.status is FeasibilityStatus.FEASIBLE_ZERO_OBJECTIVE
    assert again.iterations <= first.iterations
    assert again.iterations <= 2


def test_infeasible_projective_pair(warm_kernels):
    res = solve_joint_feasibility(_qubit_problem(1.0))
    assert res.status is FeasibilityStatus.INFEASIBLE
    assert res.gap > 0.1


def test_infeasible_above_the_bound(warm_kernels):
    lam = symmetric_critical_visibility(2) + 0.04
    res = solve_joint_feasibility(_qubit_problem(lam))
    assert res.status is FeasibilityStatus.INFEASIBLE
    assert res.gap > 1e-3


def test_max_iterations_is_reported(warm_kernels):
    res = solve_joint_feasibility(_qubit_problem(1.0), max_iter=50)
    assert res.status is FeasibilityStatus.MAX_ITERATIONS
    assert res.iterations >= 50


def test_positive_objective_when_diag_stats_conflict(warm_kernels):
    # same marginals, but demand diagonal statistics that no grid with those
    # marginals can have: phase one stalls, phase two still finds a grid
    prob = _qubit_problem(0.6)
    bumped = prob.targets.copy()
    bumped[0, 0, 0, 0] += 0.05
    conflicted = FeasibilityProblem(
        a_effects=prob.a_effects.copy(),
        b_effects=prob.b_effects.copy(),
        targets=bumped,
        probe_basis=prob.probe_basis.copy(),
    )
    res = solve_joint_feasibility(conflicted)
    assert res.status is FeasibilityStatus.FEASIBLE_POSITIVE_OBJECTIVE
    assert res.objective > 0.01
    assert res.marginal_residual < 1e-6


def test_status_enum_values():
    assert FeasibilityStatus.FEASIBLE_ZERO_OBJECTIVE.value == "FeasibleZeroObjective"
    assert FeasibilityStatus.FEASIBLE_POSITIVE_OBJECTIVE.value == "FeasiblePositiveObjective"
    assert FeasibilityStatus.INFEASIBLE.value == "Infeasible"
    assert FeasibilityStatus.MAX_ITERATIONS.value == "MaxIterations"


def test_haar_feasibility_matches_closed_form_region(warm_kernels, rng):
    h = hamiltonian_from_energies([0.0, 1.0, 2.0])
    lam_crit = symmetric_critical_visibility(3)
    for seed in (1, 2, 3):
        u = haar_random_unitary(3, seed)
        below = solve_joint_feasibility(
            joint_feasibility_problem(h, h, u, lam_crit - 0.03, lam_crit - 0.03)
        )
        assert below.status is FeasibilityStatus.FEASIBLE_ZERO_OBJECTIVE


def test_estimate_critical_visibility_qubit(warm_kernels):
    history = []
    est = estimate_critical_visibility(2, 10, resolution=2e-3, seed=4, history=history)
    assert abs(est - 1.0 / np.sqrt(2.0)) < 0.005
    assert len(history) >= 3
    assert all(isinstance(ok, (bool, np.bool_)) for _, ok in history)


def test_estimate_rejects_bad_arguments():
    with pytest.raises(ValueError):
        estimate_critical_visibility(1, 5)
    with pytest.raises(ValueError):
        estimate_critical_visibility(2, 0)
