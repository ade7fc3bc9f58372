import os
import subprocess
import sys

import numpy as np
import pytest

from jointwork import _kernels
from jointwork.bloch import symmetric_critical_visibility
from jointwork.feasibility import joint_feasibility_problem
from jointwork.operators import haar_random_unitary, hamiltonian_from_energies

HAD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)


def _env(backend):
    env = dict(os.environ)
    env[_kernels.ENV_BACKEND] = backend
    return env


def test_active_backend_value():
    assert _kernels.ACTIVE_BACKEND in ("numba", "numpy")
    if _kernels.HAVE_NUMBA:
        assert _kernels.ACTIVE_BACKEND == "numba"


def test_env_override_selects_numpy():
    out = subprocess.run(
        [sys.executable, "-c", "from jointwork import _kernels; print(_kernels.ACTIVE_BACKEND)"],
        env=_env("numpy"),
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0
    assert out.stdout.strip() == "numpy"


def test_env_override_rejects_garbage():
    out = subprocess.run(
        [sys.executable, "-c", "import jointwork"],
        env=_env("cuda"),
        capture_output=True,
        text=True,
    )
    assert out.returncode != 0
    assert "JOINTWORK_BACKEND" in out.stderr


def _sampler_inputs(rng):
    m = 4
    p_first = rng.random(m)
    p_first /= p_first.sum()
    cond = rng.random((m, m))
    cond /= cond.sum(axis=1, keepdims=True)
    cum_first = np.cumsum(p_first)
    cum_cond = np.cumsum(cond, axis=1)
    n = 100000
    u = rng.random((2, n))
    return cum_first, cum_cond, u[0], u[1]


def test_sampler_backends_bit_identical(rng, warm_kernels):
    if not _kernels.HAVE_NUMBA:
        pytest.skip("numba not importable")
    args = _sampler_inputs(rng)
    a = _kernels._sample_counts_numpy(*args)
    b = _kernels._sample_counts_numba(*args)
    assert np.array_equal(a, b)
    assert a.sum() == args[2].shape[0]


def test_sampler_cell_edge_convention(warm_kernels):
    # u exactly on a cumulative boundary must land in the next cell on
    # both backends, otherwise counts could differ between them
    cum_first = np.array([0.5, 1.0])
    cum_cond = np.array([[0.5, 1.0], [0.5, 1.0]])
    u_first = np.array([0.5, 0.25, 0.75])
    u_second = np.array([0.5, 0.25, 0.5])
    a = _kernels._sample_counts_numpy(cum_first, cum_cond, u_first, u_second)
    assert a[0, 0] == 1 and a[1, 1] == 2
    if _kernels.HAVE_NUMBA:
        b = _kernels._sample_counts_numba(cum_first, cum_cond, u_first, u_second)
        assert np.array_equal(a, b)


def _small_problem(lam):
    h = hamiltonian_from_energies([0.0, 1.0])
    return joint_feasibility_problem(h, h, HAD, lam, lam)


def test_dykstra_backends_agree(warm_kernels):
    if not _kernels.HAVE_NUMBA:
        pytest.skip("numba not importable")
    lam_lo = symmetric_critical_visibility(2) - 0.05
    lam_hi = symmetric_critical_visibility(2) + 0.05
    for lam, want_code in ((lam_lo, 0), (lam_hi, 1)):
        prob = _small_problem(lam)
        res_np = _run_backend(prob, "_dykstra_numpy")
        res_nb = _run_backend(prob, "_dykstra_numba")
        assert res_np[3] == want_code == res_nb[3]
        assert res_np[2] == res_nb[2]  # same iteration count
        assert abs(res_np[1] - res_nb[1]) < 1e-9  # same terminal gap
        assert np.max(np.abs(res_np[0] - res_nb[0])) < 1e-8


def _run_backend(prob, name):
    from jointwork import feasibility as fz

    fn = getattr(_kernels, name)
    v = prob.probe_basis
    a_eff = np.ascontiguousarray(np.einsum("ji,ajk,kl->ail", v.conj(), prob.a_effects, v))
    b_eff = np.ascontiguousarray(np.einsum("ji,ajk,kl->ail", v.conj(), prob.b_effects, v))
    targets = np.ascontiguousarray(
        np.einsum("ji,abjk,kl->abil", v.conj(), prob.targets, v)
    )
    d = prob.dim
    diag_target = np.ascontiguousarray(
        np.real(targets[:, :, np.arange(d), np.arange(d)])
    )
    return fn(
        a_eff, b_eff, diag_target, True, targets.copy(), 1e-7, 20000,
        fz.STALL_WINDOW, fz.STALL_SCALE,
    )


def test_warmup_idempotent(warm_kernels):
    _kernels.warmup()
    _kernels.warmup()


def test_public_solver_same_status_under_numpy_backend():
    # run the qubit probe in a numpy-forced subprocess and compare statuses
    code = (
        "from jointwork.feasibility import joint_feasibility_problem, solve_joint_feasibility\n"
        "from jointwork.operators import hamiltonian_from_energies\n"
        "import numpy as np\n"
        "h = hamiltonian_from_energies([0.0, 1.0])\n"
        "u = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2)\n"
        "for lam in (0.65, 0.75):\n"
        "    r = solve_joint_feasibility(joint_feasibility_problem(h, h, u, lam, lam))\n"
        "    print(r.status.value)\n"
    )
    out = subprocess.run(
        [sys.executable, "-c", code], env=_env("numpy"), capture_output=True, text=True
    )
    assert out.returncode == 0, out.stderr
    assert out.stdout.split() == ["FeasibleZeroObjective", "Infeasible"]
