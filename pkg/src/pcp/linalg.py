"""Dense linear-algebra primitives: SVD, proximal operators, norms.

Everything operates on plain 2-D float64 numpy arrays. All functions are
pure; none keeps internal state, so concurrent use is safe.
"""

from typing import NamedTuple

import numpy as np

from .rng import make_rng, mix_seed

# tag decorrelating power-iteration start vectors from other seeded streams
_POWER_SEED_TAG = 0x5BEC712A1

DEFAULT_POWER_TOL = 1e-8
POWER_ITERATION_CAP = 10_000


class ConvergenceError(RuntimeError):
    """An iterative estimate hit its iteration cap before reaching tolerance.

    The best estimate so far is attached as ``estimate``.
    """

    def __init__(self, message: str, estimate: float):
        super().__init__(message)
        self.estimate = estimate


class SvdResult(NamedTuple):
    U: np.ndarray            # n x k, orthonormal columns
    singular_values: np.ndarray  # length k, nonincreasing, >= 0
    V: np.ndarray            # m x k, orthonormal columns

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.singular_values) @ self.V.T


class MatrixNorms(NamedTuple):
    frobenius: float
    one_norm: float   # entrywise: sum of |m_ij|
    inf_norm: float   # entrywise: max of |m_ij|
    nuclear: float    # sum of singular values


def ensure_matrix(M: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Validate a dense real matrix: 2-D, float64, every entry finite."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {M.shape}")
    if M.size and not np.isfinite(M).all():
        raise ValueError(f"{name} contains NaN or Inf entries")
    return M


def svd(M: np.ndarray) -> SvdResult:
    """Full singular value decomposition M = U diag(s) V^T.

    Deterministic for a fixed input (LAPACK divide-and-conquer underneath).
    Degenerate shapes are supported: the zero matrix yields all-zero singular
    values with canonical-basis U and V, and 0x0 inputs yield empty factors.

    Raises
    ------
    numpy.linalg.LinAlgError
        If the underlying iteration fails to converge (numerical breakdown).
    """
    M = ensure_matrix(M)
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    return SvdResult(U=U, singular_values=s, V=Vt.T)


def soft_threshold(M: np.ndarray, tau: float) -> np.ndarray:
    """Entrywise shrinkage sgn(m) * max(|m| - tau, 0): prox of tau * ||.||_1."""
    M = ensure_matrix(M)
    if tau < 0:
        raise ValueError(f"threshold must be nonnegative, got {tau}")
    return np.sign(M) * np.maximum(np.abs(M) - tau, 0.0)


def svt(M: np.ndarray, tau: float) -> np.ndarray:
    """Singular value thresholding: prox of tau * ||.||_*.

    Shrinks every singular value by tau, clamping at zero; values exactly
    equal to tau map to exactly zero.
    """
    if tau < 0:
        raise ValueError(f"threshold must be nonnegative, got {tau}")
    U, s, V = svd(M)
    s_shrunk = np.maximum(s - tau, 0.0)
    return (U * s_shrunk) @ V.T


def spectral_norm(M: np.ndarray, tol: float = DEFAULT_POWER_TOL) -> float:
    """Largest singular value via power iteration on M^T M.

    The start vector is a fixed pseudo-random Gaussian seeded only from the
    matrix dimensions, so repeated calls on equal inputs return identical
    estimates. Stops when the estimate changes by less than tol relative.

    Raises
    ------
    ConvergenceError
        If the iteration cap is reached; carries the best estimate.
    """
    M = ensure_matrix(M)
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    n, m = M.shape
    if n == 0 or m == 0:
        return 0.0
    rng = make_rng(mix_seed(_POWER_SEED_TAG, n, m))
    v = rng.random(m) - 0.5
    nv = np.linalg.norm(v)
    if nv == 0.0:  # cannot happen with the seeded start, kept for safety
        v = np.ones(m)
        nv = np.sqrt(m)
    v /= nv
    est = 0.0
    prev_delta = np.inf
    for _ in range(POWER_ITERATION_CAP):
        w = M.T @ (M @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0  # v in the null space and M^T M v = 0: norm-0 slice
        new_est = np.sqrt(nw)
        v = w / nw
        if _power_converged(new_est, est, prev_delta, tol):
            return float(new_est)
        prev_delta = abs(new_est - est)
        est = new_est
    raise ConvergenceError(
        f"power iteration did not reach tol={tol} in {POWER_ITERATION_CAP} steps",
        estimate=float(est),
    )


def _power_converged(new_est: float, est: float, prev_delta: float, tol: float) -> bool:
    """Aitken-style stop for geometric estimate sequences.

    Successive increments of a power-iteration estimate shrink by roughly a
    constant ratio t, so the remaining error is about delta * t / (1 - t).
    Estimating t from consecutive increments keeps the reported tolerance an
    honest bound rather than a per-step change.
    """
    delta = abs(new_est - est)
    floor = tol * max(new_est, np.finfo(float).tiny)
    if delta == 0.0:
        return True
    if not np.isfinite(prev_delta) or prev_delta <= 0.0:
        return False
    ratio = min(delta / prev_delta, 0.999)
    return delta * ratio / (1.0 - ratio) <= floor


def norms(M: np.ndarray) -> MatrixNorms:
    """Frobenius, entrywise 1-norm, entrywise max-norm, nuclear norm."""
    M = ensure_matrix(M)
    if M.size == 0:
        return MatrixNorms(0.0, 0.0, 0.0, 0.0)
    s = np.linalg.svd(M, compute_uv=False)
    return MatrixNorms(
        frobenius=float(np.linalg.norm(M)),
        one_norm=float(np.abs(M).sum()),
        inf_norm=float(np.abs(M).max()),
        nuclear=float(s.sum()),
    )
