"""Timing comparison for the two kernel implementations.

Runs the projection solver and the trajectory sampler through the jit
build and the plain numpy build on identical inputs, so the reported
ratio is the jit speedup. Safe to run without numba; it then reports
the numpy path alone.

    python3 benchmarks/bench_kernels.py [--repeats 5] [--samples 1000000]
"""

import argparse
import time

import numpy as np

from jointwork import _kernels
from jointwork.bloch import symmetric_critical_visibility
from jointwork.feasibility import STALL_SCALE, STALL_WINDOW, joint_feasibility_problem
from jointwork.gtpm import gibbs_state, gtpm_distribution
from jointwork.operators import haar_random_unitary, hamiltonian_from_energies
from jointwork.povm import luders_instrument, noisy_effects


def _median_time(fn, repeats):
    out = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return float(np.median(out))


def _dykstra_args(d, lam, seed):
    h = hamiltonian_from_energies(np.arange(d, dtype=float))
    u = haar_random_unitary(d, seed)
    prob = joint_feasibility_problem(h, h, u, lam, lam)
    v = prob.probe_basis
    a_eff = np.ascontiguousarray(np.einsum("ji,ajk,kl->ail", v.conj(), prob.a_effects, v))
    b_eff = np.ascontiguousarray(np.einsum("ji,ajk,kl->ail", v.conj(), prob.b_effects, v))
    t = np.ascontiguousarray(np.einsum("ji,abjk,kl->abil", v.conj(), prob.targets, v))
    diag = np.ascontiguousarray(np.real(t[:, :, np.arange(d), np.arange(d)]))
    # start away from the solution so the solver actually has to work
    start = np.zeros_like(t)
    start[:, :, np.arange(d), np.arange(d)] = 1.0 / (d * d)
    return a_eff, b_eff, diag, True, start, 1e-7, 20000, STALL_WINDOW, STALL_SCALE


def _sampler_args(d, n, seed):
    h = hamiltonian_from_energies(np.arange(d, dtype=float))
    u = haar_random_unitary(d, seed)
    inst = luders_instrument(noisy_effects(h, 0.8))
    b_lab = noisy_effects(h, 0.5).povm
    rho = gibbs_state(h, 1.0).rho
    joint = gtpm_distribution(rho, inst, u, b_lab)
    p_first = joint.sum(axis=1)
    cond = joint / p_first[:, None]
    rng = np.random.default_rng(seed)
    u01 = rng.random((2, n))
    return np.cumsum(p_first), np.cumsum(cond, axis=1), u01[0], u01[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--samples", type=int, default=1000000)
    args = ap.parse_args()

    impls = [("numpy", _kernels._dykstra_numpy, _kernels._sample_counts_numpy)]
    if _kernels.HAVE_NUMBA:
        impls.append(("numba", _kernels._dykstra_numba, _kernels._sample_counts_numba))
        _kernels.warmup()

    print(f"active backend: {_kernels.ACTIVE_BACKEND}, repeats: {args.repeats}")
    rows = []
    for d in (2, 3, 4):
        lam = symmetric_critical_visibility(d) - 0.02
        dargs = _dykstra_args(d, lam, seed=d)
        for name, dyk, _ in impls:
            dyk(*dargs)  # one untimed pass per implementation
            t = _median_time(lambda: dyk(*dargs), args.repeats)
            iters = dyk(*dargs)[2]
            rows.append((f"dykstra d={d} ({iters} iters)", name, t))

    sargs = _sampler_args(3, args.samples, seed=7)
    for name, _, samp in impls:
        samp(*sargs)
        t = _median_time(lambda: samp(*sargs), args.repeats)
        rows.append((f"sampler n={args.samples}", name, t))

    width = max(len(r[0]) for r in rows)
    base = {}
    for label, name, t in rows:
        base.setdefault(label, t)
        ratio = base[label] / t
        print(f"{label:<{width}}  {name:<6} {t * 1e3:9.3f} ms   x{ratio:.1f}")


if __name__ == "__main__":
    main()
