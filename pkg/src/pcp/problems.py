"""Synthetic low-rank + sparse problem generation and model parameters.

Ground truth follows the standard random model: L0 is a product of two
n x r Gaussian factors with entry variance 100/n, S0 carries +/-1 signs on a
random support of density rho (Bernoulli or exact-count), and D = L0 + S0.
Also provides the incoherence measurement of the low-rank factor and the
weighting parameters for the pursuit program.
"""

import math
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from .linalg import ensure_matrix
from .rng import make_rng, mix_seed, normal_matrix

SupportModel = Literal["bernoulli", "exact"]

# sub-stream tags within one instance seed
_TAG_LOWRANK = 1
_TAG_SUPPORT = 2

# numerical-rank cutoff: sigma_{r+1} <= RANK_TOL * sigma_1 counts as rank r
RANK_TOL = 1e-8


@dataclass
class SupportSet:
    """Corruption support Omega as a boolean mask, with an optional partition.

    When ``partition`` is present it lists j0 boolean masks Omega_1..Omega_j0
    whose union is exactly the complement of ``mask`` (the golfing batches),
    each sampled Bernoulli(q).
    """

    mask: np.ndarray
    partition: Optional[list] = None
    q: Optional[float] = None

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.mask.ndim != 2 or self.mask.shape[0] != self.mask.shape[1]:
            raise ValueError(f"support mask must be square, got {self.mask.shape}")

    @property
    def n(self) -> int:
        return self.mask.shape[0]

    @property
    def count(self) -> int:
        return int(self.mask.sum())

    @property
    def indices(self) -> set:
        """Set of (row, col) pairs in Omega. Intended for small instances."""
        rows, cols = np.nonzero(self.mask)
        return set(zip(rows.tolist(), cols.tolist()))

    def complement_mask(self) -> np.ndarray:
        return ~self.mask


@dataclass
class ProblemInstance:
    """One synthetic test case D = L0 + S0 with its generation metadata."""

    L0: np.ndarray
    S0: np.ndarray
    D: np.ndarray
    n: int
    r: int
    rho: float
    seed: int
    support_model: SupportModel
    omega: Optional[SupportSet] = field(repr=False, default=None)


def generate_low_rank(n: int, r: int, seed: int) -> np.ndarray:
    """Rank-r ground truth R1 @ R2^T with i.i.d. N(0, 100/n) factor entries."""
    if not 1 <= r <= n:
        raise ValueError(f"rank must satisfy 1 <= r <= n, got r={r}, n={n}")
    rng = make_rng(seed)
    std = math.sqrt(100.0 / n)
    R1 = normal_matrix(rng, n, r, std)
    R2 = normal_matrix(rng, n, r, std)
    return R1 @ R2.T


def generate_sign_corruption(
    n: int, rho: float, model: SupportModel, seed: int
) -> tuple:
    """Sparse +/-1 corruption matrix and its support.

    model="bernoulli": each entry is nonzero independently with probability
    rho. model="exact": the support is uniform among all subsets of size
    floor(rho * n^2), sampled by a seeded shuffle of the linear indices.
    Nonzero entries are +1 or -1 with equal probability either way.
    """
    _check_rho(rho)
    if model not in ("bernoulli", "exact"):
        raise ValueError(f"unknown support model {model!r}")
    rng = make_rng(seed)
    S = np.zeros((n, n))
    if model == "bernoulli":
        mask = rng.random((n, n)) < rho
        signs = np.where(rng.random((n, n)) < 0.5, 1.0, -1.0)
        S[mask] = signs[mask]
    else:
        k = int(math.floor(rho * n * n))
        order = rng.permutation(n * n)
        chosen = order[:k]
        signs = np.where(rng.random(k) < 0.5, 1.0, -1.0)
        S.flat[chosen] = signs
        mask = S != 0.0
    return S, SupportSet(mask=mask)


def sample_golfing_partition(n: int, rho: float, j0: int, seed: int) -> SupportSet:
    """Support of density rho built from j0 independent Bernoulli(q) batches.

    q solves (1-q)^j0 = rho, so the complement of the union of the batches
    is entrywise Bernoulli(rho). The batches are attached as the partition,
    ready for the golfing construction of the dual certificate.
    """
    _check_rho(rho)
    if j0 < 1:
        raise ValueError(f"j0 must be >= 1, got {j0}")
    q = 1.0 - rho ** (1.0 / j0)
    rng = make_rng(seed)
    batches = [rng.random((n, n)) < q for _ in range(j0)]
    union = np.zeros((n, n), dtype=bool)
    for b in batches:
        union |= b
    return SupportSet(mask=~union, partition=batches, q=q)


def random_signs_on(omega: SupportSet, seed: int) -> np.ndarray:
    """+/-1 matrix supported exactly on omega, signs i.i.d. equiprobable."""
    rng = make_rng(seed)
    signs = np.where(rng.random((omega.n, omega.n)) < 0.5, 1.0, -1.0)
    E = np.zeros((omega.n, omega.n))
    E[omega.mask] = signs[omega.mask]
    return E


def make_instance(
    n: int,
    r: int,
    rho: float,
    seed: int,
    support_model: SupportModel = "exact",
) -> ProblemInstance:
    """Full synthetic instance; L0 and S0 use decorrelated sub-streams."""
    L0 = generate_low_rank(n, r, mix_seed(seed, _TAG_LOWRANK))
    S0, omega = generate_sign_corruption(
        n, rho, support_model, mix_seed(seed, _TAG_SUPPORT)
    )
    D = L0 + S0
    return ProblemInstance(
        L0=L0, S0=S0, D=D, n=n, r=r, rho=rho, seed=seed,
        support_model=support_model, omega=omega,
    )


class IncoherenceResult:
    """Leverage measurements of a rank-r matrix against the canonical basis."""

    __slots__ = ("mu_row", "mu_col", "mu_cross", "mu")

    def __init__(self, mu_row: float, mu_col: float, mu_cross: float):
        self.mu_row = mu_row
        self.mu_col = mu_col
        self.mu_cross = mu_cross
        self.mu = max(mu_row, mu_col, mu_cross)

    def __repr__(self):
        return (
            f"IncoherenceResult(mu_row={self.mu_row:.6g}, mu_col={self.mu_col:.6g}, "
            f"mu_cross={self.mu_cross:.6g}, mu={self.mu:.6g})"
        )


def incoherence_mu(L: np.ndarray, r: int) -> IncoherenceResult:
    """Smallest mu making the three incoherence bounds hold for L.

    Uses the reduced SVD with exactly r columns. mu_row and mu_col scale the
    worst row leverage of the left/right singular factors by n/r; mu_cross
    scales the squared max entry of U V^T by n^2/r. ``mu`` is the max of the
    three, i.e. the smallest constant for which all three bounds are true.

    Raises ValueError when the numerical rank of L exceeds r
    (sigma_{r+1} > 1e-8 * sigma_1).
    """
    L = ensure_matrix(L)
    n = L.shape[0]
    if L.shape[0] != L.shape[1]:
        raise ValueError(f"expected a square matrix, got {L.shape}")
    if not 1 <= r <= n:
        raise ValueError(f"rank must satisfy 1 <= r <= n, got r={r}")
    U, s, Vt = np.linalg.svd(L)
    if r < len(s) and s[0] > 0 and s[r] > RANK_TOL * s[0]:
        raise ValueError(
            f"numerical rank exceeds r={r}: sigma_{r+1}/sigma_1 = {s[r] / s[0]:.3e}"
        )
    Ur = U[:, :r]
    Vr = Vt[:r, :].T
    mu_row = (n / r) * float((Ur * Ur).sum(axis=1).max())
    mu_col = (n / r) * float((Vr * Vr).sum(axis=1).max())
    uv_inf = float(np.abs(Ur @ Vr.T).max())
    mu_cross = (n * n / r) * uv_inf**2
    return IncoherenceResult(mu_row, mu_col, mu_cross)


def lambda_dense(n: int, rho: float, C1: float) -> float:
    """Corruption-aware weighting parameter for the pursuit program.

    lambda = C1 * (4*sqrt(1-rho) + 9/4)^(-1) * sqrt((1-rho) / (n*rho)).
    Strictly decreasing in rho; singular at rho in {0, 1}, which are
    rejected.
    """
    _check_rho(rho)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if C1 < 0:
        raise ValueError(f"C1 must be nonnegative, got {C1}")
    return C1 / (4.0 * math.sqrt(1.0 - rho) + 2.25) * math.sqrt((1.0 - rho) / (n * rho))


def lambda_classic(n: int) -> float:
    """The classical weighting 1/sqrt(n)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return 1.0 / math.sqrt(n)


def rank_bound_ok(n: int, r: int, mu: float, C2: float = 1.0) -> bool:
    """Check the admissible-rank condition r < C2 * n / (mu * ln(n)^2).

    Natural log; the constant C2 absorbs any base change and defaults to 1.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    return r < C2 * n / (mu * math.log(n) ** 2)


def _check_rho(rho: float) -> None:
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie strictly in (0, 1), got {rho}")
