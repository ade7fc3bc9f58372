"""Generalized Gell-Mann basis, Bloch-picture channel matrices, and the
closed-form visibility bounds.

Conventions: for dimension d the basis is G_0 = 1/sqrt(d) followed by the
symmetric off-diagonal generators (pairs j<k in lexicographic order), the
antisymmetric ones in the same pair order, then the d-1 diagonal ladder
generators. All generators are orthonormal under the Hilbert-Schmidt inner
product, so Bloch coefficients are plain traces.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NonInvertibleInstrumentError, NonlinearMapError
from .operators import require_hermitian

# visibility this close to 1 makes the measurement channel numerically singular
INVERTIBILITY_CUTOFF = 1.0 - 1e-9

CHANNEL_REALNESS_TOL = 1e-12
LINEARITY_SPOT_TOL = 1e-9


@dataclass(frozen=True)
class GellMannBasis:
    dim: int
    generators: np.ndarray  # (d*d, d, d) complex, G_0 first

    def __post_init__(self):
        self.generators.setflags(write=False)

    @property
    def offdiagonal_count(self) -> int:
        # symmetric + antisymmetric generators, the block scaled by kappa
        return self.dim * self.dim - self.dim


@lru_cache(maxsize=None)
def build_basis(d: int) -> GellMannBasis:
    """Orthonormal Hermitian basis of d x d matrices in the fixed ordering."""
    if d < 2:
        raise ValueError(f"basis needs d >= 2, got {d}")
    gens = np.zeros((d * d, d, d), dtype=np.complex128)
    gens[0] = np.eye(d) / np.sqrt(d)
    idx = 1
    pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
    for j, k in pairs:
        g = np.zeros((d, d), dtype=np.complex128)
        g[j, k] = g[k, j] = 1.0 / np.sqrt(2.0)
        gens[idx] = g
        idx += 1
    for j, k in pairs:
        g = np.zeros((d, d), dtype=np.complex128)
        g[j, k] = -1j / np.sqrt(2.0)
        g[k, j] = 1j / np.sqrt(2.0)
        gens[idx] = g
        idx += 1
    for l in range(1, d):
        v = np.zeros(d)
        v[:l] = 1.0
        v[l] = -float(l)
        gens[idx] = np.diag(v / np.sqrt(l * (l + 1.0))).astype(np.complex128)
        idx += 1
    return GellMannBasis(dim=d, generators=gens)


def to_bloch(x, basis: GellMannBasis) -> np.ndarray:
    """Coefficients Tr[G_mu X] of a Hermitian X, as a real d^2 vector."""
    a = require_hermitian(x)
    if a.shape[0] != basis.dim:
        raise ValueError(f"operator dim {a.shape[0]} != basis dim {basis.dim}")
    return np.einsum("mij,ji->m", basis.generators, a).real


def from_bloch(coeffs, basis: GellMannBasis) -> np.ndarray:
    v = np.asarray(coeffs, dtype=np.float64).ravel()
    if v.shape[0] != basis.dim ** 2:
        raise ValueError(f"need {basis.dim ** 2} coefficients, got {v.shape[0]}")
    return np.einsum("m,mij->ij", v, basis.generators)


def channel_matrix(map_fn, basis: GellMannBasis) -> np.ndarray:
    """Real matrix L_{mu nu} = Tr[G_mu map(G_nu)] of a linear map.

    A one-shot linearity spot check rejects silently nonlinear callables;
    a map that does not preserve Hermiticity shows up as complex entries
    and is rejected too.
    """
    g = basis.generators
    probe = map_fn(g[0] + 0.5 * g[1])
    split = map_fn(g[0]) + 0.5 * map_fn(g[1])
    if np.max(np.abs(probe - split)) > LINEARITY_SPOT_TOL:
        raise NonlinearMapError(
            f"map fails linearity spot check by {np.max(np.abs(probe - split)):.3e}"
        )
    n = basis.dim ** 2
    images = np.stack([map_fn(g[nu]) for nu in range(n)])
    lam = np.einsum("mij,nji->mn", g, images)
    worst = np.max(np.abs(lam.imag))
    if worst > CHANNEL_REALNESS_TOL:
        raise NonlinearMapError(
            f"map is not Hermiticity-preserving (imaginary part {worst:.3e})"
        )
    return lam.real


def kappa(d: int, lam: float) -> float:
    """Off-diagonal survival factor of the measurement channel."""
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"visibility must lie in [0,1], got {lam}")
    u = (1.0 - lam) / d
    return 2.0 * np.sqrt(lam + u) * np.sqrt(u) + (d - 2.0) * u


def gamma_bound(d: int, lam: float) -> float:
    """Largest second visibility compatible with positivity at first visibility lam."""
    k = kappa(d, lam)
    return 2.0 * k / (d + 2.0 * k - d * k)


def symmetric_critical_visibility(d: int) -> float:
    """Unique fixed point lam = gamma_bound(d, lam), by bisection to 1e-10.

    gamma_bound(d, .) decreases from 1 to 0 on [0,1] while the identity
    increases, so the bracket [0,1] is valid and the root unique.
    """
    lo, hi = 0.0, 1.0
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if gamma_bound(d, mid) > mid:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def lambda_opt(d: int) -> float:
    """Critical visibility of the best known general joint-measurability bound."""
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    return (d - 2.0 + np.sqrt(d * d + 4.0 * d - 4.0)) / (4.0 * (d - 1.0))


def lambda_mub(d: int, printed: bool = False) -> float:
    """Critical visibility for mutually unbiased pairs.

    The corrected reading 0.5*(1 + 1/(sqrt(d)+1)) is the default; printed=True
    returns the variant 0.5/(sqrt(d)+1), kept for comparison (at d=2 it drops
    below every other reference value, which is why it is not the default).
    """
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    inner = 1.0 / (np.sqrt(d) + 1.0)
    if printed:
        return 0.5 * inner
    return 0.5 * (1.0 + inner)


def reference_visibilities(d: int, printed_mub: bool = False) -> tuple:
    """(lambda_opt, lambda_mub) reference curve values for dimension d."""
    return lambda_opt(d), lambda_mub(d, printed=printed_mub)


@dataclass(frozen=True)
class VisibilityPair:
    """Visibilities of the first (lam) and second (gamma) noisy measurement."""

    lam: float
    gamma: float

    def __post_init__(self):
        if not (0.0 < self.lam < 1.0 and 0.0 < self.gamma < 1.0):
            raise ValueError(
                f"visibilities must lie strictly inside (0,1), got ({self.lam}, {self.gamma})"
            )

    def admissible(self, d: int) -> bool:
        return self.gamma <= gamma_bound(d, self.lam)


def choi_matrix(d: int, pair: VisibilityPair) -> np.ndarray:
    """Choi matrix (scaled by d^2 relative to the normalized maximally
    entangled state) of the composed map: depolarize, then undo the
    measurement channel.

    On basis units the composed map acts as |i><i| -> gamma|i><i| + (1-gamma)/d
    and |i><j| -> (gamma/kappa)|i><j| for i != j, which is what gets assembled
    block by block below.
    """
    if pair.lam >= INVERTIBILITY_CUTOFF:
        raise NonInvertibleInstrumentError(
            f"visibility {pair.lam} leaves no invertible measurement channel"
        )
    k = kappa(d, pair.lam)
    g = pair.gamma
    dm = np.zeros((d * d, d * d), dtype=np.complex128)
    eye = np.eye(d, dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            if i == j:
                block = g * np.outer(eye[i], eye[i]) + (1.0 - g) / d * eye
            else:
                block = (g / k) * np.outer(eye[i], eye[j].conj())
            dm[i * d:(i + 1) * d, j * d:(j + 1) * d] = d * block
    return dm


def _product_expectation(dm_tensor, a, b):
    return np.einsum("i,k,ikjl,j,l->", a.conj(), b.conj(), dm_tensor, a, b).real


def product_state_minimum(dm: np.ndarray, d: int, restarts: int = 8, seed: int = 0) -> float:
    """Minimum of <a x b| D |a x b> over product states, by alternating
    eigenvector descent with random restarts.

    The first start is the known analytic minimizer support pattern
    (equal weight on the first two levels, opposite relative sign), which
    makes the boundary case exact; restarts guard against other basins.
    """
    t = dm.reshape(d, d, d, d)
    rng = np.random.default_rng(seed)
    starts = []
    a0 = np.zeros(d, dtype=np.complex128)
    b0 = np.zeros(d, dtype=np.complex128)
    a0[0] = a0[1] = 1.0 / np.sqrt(2.0)
    b0[0] = 1.0 / np.sqrt(2.0)
    b0[1] = -1.0 / np.sqrt(2.0)
    starts.append((a0, b0))
    for _ in range(restarts):
        ra = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        rb = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        starts.append((ra / np.linalg.norm(ra), rb / np.linalg.norm(rb)))
    best = np.inf
    for a, b in starts:
        val = _product_expectation(t, a, b)
        for _ in range(500):
            ma = np.einsum("k,ikjl,l->ij", b.conj(), t, b)
            w, v = np.linalg.eigh(0.5 * (ma + ma.conj().T))
            a = v[:, 0]
            mb = np.einsum("i,ikjl,j->kl", a.conj(), t, a)
            w, v = np.linalg.eigh(0.5 * (mb + mb.conj().T))
            b = v[:, 0]
            new = _product_expectation(t, a, b)
            if abs(val - new) <= 1e-14:
                val = new
                break
            val = new
        best = min(best, val)
    return float(best)


def choi_positivity_margin(d: int, pair: VisibilityPair, restarts: int = 8, seed: int = 0) -> float:
    """Minimal product-state expectation of the Choi matrix.

    Computed in closed form, 1 - gamma + d*gamma/2 - d*gamma/(2*kappa), and
    cross-checked against direct numerical minimization over the constructed
    Choi matrix; disagreement beyond 1e-8 raises, since it would mean the
    two derivations of the visibility bound drifted apart.
    """
    if pair.lam >= INVERTIBILITY_CUTOFF:
        raise NonInvertibleInstrumentError(
            f"visibility {pair.lam} leaves no invertible measurement channel"
        )
    k = kappa(d, pair.lam)
    g = pair.gamma
    closed = 1.0 - g + d * g / 2.0 - d * g / (2.0 * k)
    numeric = product_state_minimum(choi_matrix(d, pair), d, restarts=restarts, seed=seed)
    if abs(closed - numeric) > 1e-8:
        raise ArithmeticError(
            f"closed-form margin {closed:.12e} and numerical minimum {numeric:.12e} disagree"
        )
    return closed
