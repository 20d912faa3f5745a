"""Solvers: principal component pursuit via inexact augmented Lagrangian,
plus the truncated-SVD baseline it is compared against.

The pursuit program is min ||L||_* + lambda*||S||_1 subject to L + S = D.
Each outer iteration alternates a singular value thresholding step on L and
an entrywise shrinkage step on S against the running multiplier Y, then
grows the penalty:

    L <- svt_{1/mu}(D - S + Y/mu)
    S <- shrink_{lambda/mu}(D - L + Y/mu)
    Y <- Y + mu * (D - L - S)
    mu <- min(rho_mu * mu, mu_max)

with Y0 = D / max(||D||_2, ||D||_inf / lambda) and mu0 = 1.25/||D||_2,
stopping on the relative feasibility residual ||D - L - S||_F / ||D||_F.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .linalg import ensure_matrix, soft_threshold, svd, svt


@dataclass
class SolverConfig:
    tol_feasibility: float = 1e-7
    max_iters: int = 1000
    mu0: Optional[float] = None       # None: 1.25 / ||D||_2
    rho_mu: float = 1.5
    mu_max_factor: float = 1e7        # mu_max = factor * mu0
    svd_rank_hint: Optional[int] = None  # reserved; full SVD is always used

    def __post_init__(self):
        if self.tol_feasibility <= 0:
            raise ValueError("tol_feasibility must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.rho_mu <= 1.0:
            raise ValueError("rho_mu must be > 1")


@dataclass
class SolveResult:
    L_hat: np.ndarray = field(repr=False)
    S_hat: np.ndarray = field(repr=False)
    iterations: int
    feasibility_residual: float
    objective: float
    converged: bool


def pcp_solve(D: np.ndarray, lam: float, cfg: Optional[SolverConfig] = None) -> SolveResult:
    """Decompose D into low-rank and sparse parts by pursuit.

    Parameters
    ----------
    D : square data matrix
    lam : positive weight on the sparse term
    cfg : schedule constants; defaults are sized for desk-scale matrices

    Returns the final iterate with converged=False when the feasibility
    tolerance was not met within cfg.max_iters; the best iterate and its
    residual are still reported.
    """
    D = ensure_matrix(D, "D")
    if D.shape[0] != D.shape[1]:
        raise ValueError(f"D must be square, got {D.shape}")
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if cfg is None:
        cfg = SolverConfig()

    d_fro = float(np.linalg.norm(D))
    if d_fro == 0.0:
        zero = np.zeros_like(D)
        return SolveResult(
            L_hat=zero, S_hat=zero.copy(), iterations=0,
            feasibility_residual=0.0, objective=0.0, converged=True,
        )

    d_spec = float(np.linalg.svd(D, compute_uv=False)[0])
    d_inf = float(np.abs(D).max())
    Y = D / max(d_spec, d_inf / lam)
    mu = cfg.mu0 if cfg.mu0 is not None else 1.25 / d_spec
    mu_max = cfg.mu_max_factor * mu

    L = np.zeros_like(D)
    S = np.zeros_like(D)
    residual = 1.0
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iters + 1):
        L = svt(D - S + Y / mu, 1.0 / mu)
        S = soft_threshold(D - L + Y / mu, lam / mu)
        gap = D - L - S
        Y = Y + mu * gap
        mu = min(cfg.rho_mu * mu, mu_max)
        residual = float(np.linalg.norm(gap)) / d_fro
        if residual <= cfg.tol_feasibility:
            converged = True
            break

    objective = float(
        np.linalg.svd(L, compute_uv=False).sum() + lam * np.abs(S).sum()
    )
    return SolveResult(
        L_hat=L, S_hat=S, iterations=iterations,
        feasibility_residual=residual, objective=objective, converged=converged,
    )


def pca_baseline(D: np.ndarray, r: int) -> np.ndarray:
    """Best rank-r approximation of D in spectral norm (truncated SVD)."""
    D = ensure_matrix(D, "D")
    n = min(D.shape)
    if not 0 <= r <= n:
        raise ValueError(f"rank must satisfy 0 <= r <= {n}, got {r}")
    if r == 0:
        return np.zeros_like(D)
    U, s, V = svd(D)
    return (U[:, :r] * s[:r]) @ V[:, :r].T


def recovery_success(L0: np.ndarray, L_hat: np.ndarray, threshold: float = 0.01) -> bool:
    """Relative Frobenius recovery criterion ||L0 - L_hat||_F / ||L0||_F < threshold."""
    L0 = ensure_matrix(L0, "L0")
    L_hat = ensure_matrix(L_hat, "L_hat")
    denom = float(np.linalg.norm(L0))
    if denom == 0.0:
        raise ValueError("L0 must be nonzero for the relative criterion")
    return float(np.linalg.norm(L0 - L_hat)) / denom < threshold
