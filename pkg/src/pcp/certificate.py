"""Dual-certificate machinery: tangent/support projectors, the golfing and
Neumann-series certificate components, and the optimality-condition checks.

With L0 = U Sigma V^T of rank r, T is the tangent subspace
{U X^T + Y V^T} and Omega the subspace of matrices supported on the
corruption set. A certificate W with

    P_T W = 0,
    ||W|| < alpha,
    ||P_Omega(U V^T + W - lambda * E)||_F <= lambda * eps^2,
    ||P_Omega_perp(U V^T + W)||_inf < lambda / 2,

where E is the corruption sign matrix, witnesses that the low-rank/sparse
pair is the unique optimum of the pursuit program (given lambda < 1 - alpha
and ||P_Omega P_T|| <= 1 - eps). W is built as a sum of two parts: a golfing
recursion handling the tangent-space conditions and a Neumann least-squares
series matching lambda * E on the support.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .linalg import ConvergenceError, _power_converged, ensure_matrix, spectral_norm
from .problems import RANK_TOL, SupportSet
from .rng import make_rng, mix_seed

# tag for the operator-norm power iteration start matrix
_OPNORM_SEED_TAG = 0x0113A7B5

OPNORM_TOL = 1e-8
OPNORM_ITERATION_CAP = 10_000


@dataclass
class TangentSubspace:
    """Orthonormal factors (U, V) of the rank-r matrix anchoring T."""

    U: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        self.U = ensure_matrix(self.U, "U")
        self.V = ensure_matrix(self.V, "V")
        if self.U.shape != self.V.shape:
            raise ValueError(
                f"U and V must share a shape, got {self.U.shape} vs {self.V.shape}"
            )
        for name, Q in (("U", self.U), ("V", self.V)):
            if Q.shape[1]:
                gram_err = np.abs(Q.T @ Q - np.eye(Q.shape[1])).max()
                if gram_err > 1e-10:
                    raise ValueError(
                        f"{name} columns are not orthonormal (deviation {gram_err:.3e})"
                    )

    @property
    def n(self) -> int:
        return self.U.shape[0]

    @property
    def r(self) -> int:
        return self.U.shape[1]

    def uv(self) -> np.ndarray:
        """The matrix U V^T entering every certificate condition."""
        return self.U @ self.V.T

    @classmethod
    def from_low_rank(cls, L: np.ndarray, r: Optional[int] = None) -> "TangentSubspace":
        """Tangent subspace at a numerically rank-r matrix.

        r=None detects the numerical rank (singular values above
        1e-8 * sigma_1); passing r checks sigma_{r+1} against the same cutoff.
        """
        L = ensure_matrix(L, "L")
        U, s, Vt = np.linalg.svd(L)
        if s.size == 0 or s[0] == 0.0:
            detected = 0
        else:
            detected = int((s > RANK_TOL * s[0]).sum())
        if r is None:
            r = detected
        elif detected > r:
            raise ValueError(
                f"numerical rank {detected} exceeds requested r={r} "
                f"(sigma_{r + 1}/sigma_1 = {s[r] / s[0]:.3e})"
            )
        return cls(U=U[:, :r], V=Vt[:r, :].T)


def project_tangent(M: np.ndarray, T: TangentSubspace) -> np.ndarray:
    """Orthogonal projection U U^T M + M V V^T - U U^T M V V^T onto T."""
    if T.r == 0:
        return np.zeros_like(np.asarray(M, dtype=float))
    UtM = T.U.T @ M
    MV = M @ T.V
    return T.U @ UtM + (MV - T.U @ (UtM @ T.V)) @ T.V.T


def project_tangent_complement(M: np.ndarray, T: TangentSubspace) -> np.ndarray:
    return M - project_tangent(M, T)


def project_support(M: np.ndarray, omega: SupportSet) -> np.ndarray:
    """Zero outside Omega, identity on Omega."""
    return np.where(omega.mask, M, 0.0)


def project_support_complement(M: np.ndarray, omega: SupportSet) -> np.ndarray:
    return np.where(omega.mask, 0.0, M)


def opnorm_support_tangent(
    omega: SupportSet,
    T: TangentSubspace,
    tol: float = OPNORM_TOL,
) -> float:
    """||P_Omega P_T|| via power iteration on the composition P_T P_Omega P_T.

    The composition is self-adjoint and positive semidefinite, so its top
    eigenvalue is the squared norm sought; the returned value is its square
    root. The start matrix is seeded from (n, r, |Omega|) only, making the
    estimate reproducible. Never materializes the n^2 x n^2 operator.

    Raises ConvergenceError (with the best estimate attached) at the
    iteration cap.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    n = omega.n
    if T.r == 0 or omega.count == 0:
        return 0.0
    rng = make_rng(mix_seed(_OPNORM_SEED_TAG, n, T.r, omega.count))
    M = project_tangent(rng.random((n, n)) - 0.5, T)
    nm = np.linalg.norm(M)
    if nm == 0.0:
        return 0.0
    M /= nm
    est = 0.0
    prev_delta = np.inf
    for _ in range(OPNORM_ITERATION_CAP):
        AM = project_tangent(project_support(M, omega), T)
        lam_est = float(np.tensordot(M, AM))  # Rayleigh quotient, ||M||_F = 1
        nam = np.linalg.norm(AM)
        if nam == 0.0:
            return 0.0
        M = AM / nam
        new_est = math.sqrt(max(lam_est, 0.0))
        if _power_converged(new_est, est, prev_delta, tol):
            return min(new_est, 1.0)
        prev_delta = abs(new_est - est)
        est = new_est
    raise ConvergenceError(
        f"projector-composition power iteration did not reach tol={tol} "
        f"in {OPNORM_ITERATION_CAP} steps",
        estimate=float(est),
    )


def golfing_component(
    omega: SupportSet,
    T: TangentSubspace,
    lam: Optional[float] = None,
) -> tuple:
    """Golfing construction of the tangent-handling certificate part.

    Runs Y_j = Y_{j-1} + (1/q) P_{Omega_j} P_T(U V^T - Y_{j-1}) over the
    support-complement batches attached to ``omega`` and returns
    (P_Tperp Y_j0, trace), where trace[j] = ||P_T(U V^T - Y_j)||_F for
    j = 0..j0. The trace exposes the per-step residual decay.

    ``lam`` is accepted for call symmetry with the other certificate
    constructors; the recursion itself does not depend on it.
    """
    if omega.partition is None or omega.q is None:
        raise ValueError("omega must carry a golfing partition (see sample_golfing_partition)")
    UV = T.uv()
    Y = np.zeros_like(UV)
    residual = project_tangent(UV, T)  # equals UV
    trace = [float(np.linalg.norm(residual))]
    inv_q = 1.0 / omega.q
    for batch in omega.partition:
        Y = Y + inv_q * np.where(batch, residual, 0.0)
        residual = project_tangent(UV - Y, T)
        trace.append(float(np.linalg.norm(residual)))
    return project_tangent_complement(Y, T), trace


def neumann_component(
    omega: SupportSet,
    T: TangentSubspace,
    E: np.ndarray,
    lam: float,
    tol: float = 1e-10,
    max_terms: int = 1000,
    support_tangent_norm: Optional[float] = None,
) -> np.ndarray:
    """Least-squares certificate part via the Neumann operator series.

    Computes lambda * P_Tperp sum_k (P_Omega P_T P_Omega)^k E by iterated
    projection, adding terms while the current term's Frobenius norm is at
    least tol * lambda. The result satisfies P_T W = 0 up to round-off (a
    final explicit complement projection) and matches lambda * E on the
    support up to the truncated geometric tail.

    E must be supported on Omega with entries in {-1, 0, +1}. The series
    requires ||P_Omega P_T|| < 1; values within 1e-6 of 1 are refused as
    divergent. ``support_tangent_norm`` may pass a precomputed norm to skip
    the internal power iteration.
    """
    E = ensure_matrix(E, "E")
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    off_support = E[~omega.mask]
    if off_support.size and np.abs(off_support).max() > 0:
        raise ValueError("E has entries outside the support set")
    on_support = E[omega.mask]
    if on_support.size and not np.all(np.isin(on_support, (-1.0, 0.0, 1.0))):
        raise ValueError("E entries must be -1, 0, or +1")

    sigma = (
        support_tangent_norm
        if support_tangent_norm is not None
        else opnorm_support_tangent(omega, T)
    )
    if sigma >= 1.0 - 1e-6:
        raise ValueError(
            f"||P_Omega P_T|| = {sigma:.8f} is too close to 1; Neumann series diverges"
        )

    term = E.copy()
    total = np.zeros_like(E)
    for _ in range(max_terms):
        total += term
        term = project_support(project_tangent(term, T), omega)
        if float(np.linalg.norm(term)) < tol:
            W = lam * project_tangent_complement(total, T)
            return W
    residual = float(np.linalg.norm(term))
    raise ConvergenceError(
        f"Neumann series not below tol={tol} after {max_terms} terms "
        f"(last term norm {residual:.3e})",
        estimate=residual,
    )


@dataclass
class GolfingBounds:
    """Margins of the three bound checks on the golfing certificate part."""

    w_spectral: float
    a_bound: float
    a_ok: bool
    support_residual: float
    b_bound: float
    b_ok: bool
    off_support_inf: float
    c_bound: float
    c_ok: bool
    sigma: float

    @property
    def all_ok(self) -> bool:
        return self.a_ok and self.b_ok and self.c_ok


@dataclass
class SignBounds:
    """Margins of the bound checks on the sign (Neumann) certificate part."""

    w_spectral: float
    a_bound: float
    a_ok: bool
    off_support_inf: float
    b_bound: float
    b_ok: bool
    e_spectral: float
    e_bound: float
    e_norm_ok: bool
    tail_spectral: float
    tail_bound: float
    tail_ok: bool

    @property
    def all_ok(self) -> bool:
        return self.a_ok and self.b_ok and self.e_norm_ok and self.tail_ok


@dataclass
class CertificateReport:
    """Numerical evaluation of the four optimality conditions for W."""

    pt_w_norm: float
    w_spectral: float
    omega_residual: float
    omega_perp_inf: float
    alpha: float
    epsilon: float
    lam: float
    passed: bool
    tangent_ok: bool
    spectral_ok: bool
    support_ok: bool
    off_support_ok: bool
    lambda_hypothesis_ok: bool
    opnorm_hypothesis_ok: bool
    support_tangent_norm: float
    wl_checks: Optional[GolfingBounds] = field(default=None)
    ws_checks: Optional[SignBounds] = field(default=None)

    def to_dict(self) -> dict:
        d = {
            "pt_w_norm": self.pt_w_norm,
            "w_spectral": self.w_spectral,
            "omega_residual": self.omega_residual,
            "omega_perp_inf": self.omega_perp_inf,
            "alpha": self.alpha,
            "epsilon": self.epsilon,
            "lambda": self.lam,
            "passed": self.passed,
            "tangent_ok": self.tangent_ok,
            "spectral_ok": self.spectral_ok,
            "support_ok": self.support_ok,
            "off_support_ok": self.off_support_ok,
            "lambda_hypothesis_ok": self.lambda_hypothesis_ok,
            "opnorm_hypothesis_ok": self.opnorm_hypothesis_ok,
            "support_tangent_norm": self.support_tangent_norm,
        }
        if self.wl_checks is not None:
            d["wl_checks"] = {
                "w_l_spectral": self.wl_checks.w_spectral,
                "support_residual": self.wl_checks.support_residual,
                "off_support_inf": self.wl_checks.off_support_inf,
                "sigma": self.wl_checks.sigma,
                "a_ok": self.wl_checks.a_ok,
                "b_ok": self.wl_checks.b_ok,
                "c_ok": self.wl_checks.c_ok,
            }
        if self.ws_checks is not None:
            d["ws_checks"] = {
                "w_s_spectral": self.ws_checks.w_spectral,
                "off_support_inf": self.ws_checks.off_support_inf,
                "e_spectral": self.ws_checks.e_spectral,
                "tail_spectral": self.ws_checks.tail_spectral,
                "a_ok": self.ws_checks.a_ok,
                "b_ok": self.ws_checks.b_ok,
                "e_norm_ok": self.ws_checks.e_norm_ok,
                "tail_ok": self.ws_checks.tail_ok,
            }
        return d


def verify_certificate(
    W: np.ndarray,
    T: TangentSubspace,
    omega: SupportSet,
    E: np.ndarray,
    lam: float,
    alpha: float = 0.9,
    eps: Optional[float] = None,
    support_tangent_norm: Optional[float] = None,
) -> CertificateReport:
    """Evaluate the four certificate conditions and the two hypotheses.

    ``passed`` reflects the four conditions only (tangent annihilation is
    tested as ||P_T W||_F <= 1e-8 * ||W||_F); the hypothesis flags
    lambda < 1 - alpha and ||P_Omega P_T|| <= 1 - eps are reported
    separately. eps defaults to 1 - ||P_Omega P_T|| measured on the
    instance, the loosest admissible choice.
    """
    W = ensure_matrix(W, "W")
    E = ensure_matrix(E, "E")
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")

    sigma = (
        support_tangent_norm
        if support_tangent_norm is not None
        else opnorm_support_tangent(omega, T)
    )
    if eps is None:
        eps = 1.0 - sigma
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")

    UV = T.uv()
    w_fro = float(np.linalg.norm(W))
    pt_w_norm = float(np.linalg.norm(project_tangent(W, T)))
    w_spectral = spectral_norm(W)
    G = UV + W
    omega_residual = float(np.linalg.norm(project_support(G - lam * E, omega)))
    off = project_support_complement(G, omega)
    omega_perp_inf = float(np.abs(off).max()) if off.size else 0.0

    tangent_ok = pt_w_norm <= 1e-8 * w_fro if w_fro > 0 else True
    spectral_ok = w_spectral < alpha
    support_ok = omega_residual <= lam * eps**2
    off_support_ok = omega_perp_inf < lam / 2.0
    lambda_hypothesis_ok = lam < 1.0 - alpha
    opnorm_hypothesis_ok = sigma <= 1.0 - eps + 1e-12

    return CertificateReport(
        pt_w_norm=pt_w_norm,
        w_spectral=w_spectral,
        omega_residual=omega_residual,
        omega_perp_inf=omega_perp_inf,
        alpha=alpha,
        epsilon=eps,
        lam=lam,
        passed=tangent_ok and spectral_ok and support_ok and off_support_ok,
        tangent_ok=tangent_ok,
        spectral_ok=spectral_ok,
        support_ok=support_ok,
        off_support_ok=off_support_ok,
        lambda_hypothesis_ok=lambda_hypothesis_ok,
        opnorm_hypothesis_ok=opnorm_hypothesis_ok,
        support_tangent_norm=sigma,
    )


def check_golfing_bounds(
    W_L: np.ndarray,
    T: TangentSubspace,
    omega: SupportSet,
    lam: float,
    support_tangent_norm: Optional[float] = None,
) -> GolfingBounds:
    """Bound checks on the golfing part: spectral norm below 1/10, support
    residual below lambda*(1-sigma)^2, off-support entries below lambda/4.

    sigma is the measured ||P_Omega P_T|| (not an assumed concentration
    value), so the checks certify the instance at hand.
    """
    W_L = ensure_matrix(W_L, "W_L")
    sigma = (
        support_tangent_norm
        if support_tangent_norm is not None
        else opnorm_support_tangent(omega, T)
    )
    G = T.uv() + W_L
    w_spec = spectral_norm(W_L)
    support_residual = float(np.linalg.norm(project_support(G, omega)))
    off = project_support_complement(G, omega)
    off_inf = float(np.abs(off).max()) if off.size else 0.0
    b_bound = lam * (1.0 - sigma) ** 2
    return GolfingBounds(
        w_spectral=w_spec, a_bound=0.1, a_ok=w_spec < 0.1,
        support_residual=support_residual, b_bound=b_bound,
        b_ok=support_residual < b_bound,
        off_support_inf=off_inf, c_bound=lam / 4.0, c_ok=off_inf < lam / 4.0,
        sigma=sigma,
    )


def check_sign_bounds(
    W_S: np.ndarray,
    omega: SupportSet,
    E: np.ndarray,
    lam: float,
    n: int,
    rho: float,
    T: TangentSubspace,
) -> SignBounds:
    """Bound checks on the sign part and its ingredients.

    Checks ||W_S|| < 8/10 and off-support entries below lambda/4, plus the
    two norm bounds feeding them: ||E|| <= 4*sqrt(n*rho) for the sign matrix
    and ||W_S/lambda - P_Tperp E|| <= (9/4)*sqrt(rho*n/(1-rho)) for the
    series tail beyond its leading term. W_S must come from
    neumann_component for the tail identity to hold.
    """
    W_S = ensure_matrix(W_S, "W_S")
    E = ensure_matrix(E, "E")
    if W_S.shape != (n, n):
        raise ValueError(f"W_S shape {W_S.shape} does not match n={n}")
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie strictly in (0, 1), got {rho}")
    w_spec = spectral_norm(W_S)
    off = project_support_complement(W_S, omega)
    off_inf = float(np.abs(off).max()) if off.size else 0.0
    e_spec = spectral_norm(E)
    e_bound = 4.0 * math.sqrt(n * rho)
    tail = W_S / lam - project_tangent_complement(E, T)
    tail_spec = spectral_norm(tail)
    tail_bound = 2.25 * math.sqrt(rho * n / (1.0 - rho))
    return SignBounds(
        w_spectral=w_spec, a_bound=0.8, a_ok=w_spec < 0.8,
        off_support_inf=off_inf, b_bound=lam / 4.0, b_ok=off_inf < lam / 4.0,
        e_spectral=e_spec, e_bound=e_bound, e_norm_ok=e_spec <= e_bound,
        tail_spectral=tail_spec, tail_bound=tail_bound,
        tail_ok=tail_spec <= tail_bound,
    )


def partition_support_complement(
    omega: SupportSet, j0: int, seed: int, q: Optional[float] = None
) -> SupportSet:
    """Attach a golfing partition to an existing support set.

    Every complement entry joins each of the j0 batches independently with
    probability q, conditioned on joining at least one, which reproduces the
    law of batches sampled Bernoulli(q) given their union. q defaults to
    1 - (|Omega|/n^2)^(1/j0), matching the empirical density.
    """
    if j0 < 1:
        raise ValueError(f"j0 must be >= 1, got {j0}")
    n = omega.n
    if q is None:
        density = omega.count / float(n * n)
        if density <= 0.0:
            q = 1.0  # empty support: unconditioned batches cover everything
        else:
            q = 1.0 - density ** (1.0 / j0)
    if not 0.0 < q <= 1.0:
        raise ValueError(f"q must lie in (0, 1], got {q}")
    rng = make_rng(seed)
    comp = omega.complement_mask()
    batches = [np.zeros((n, n), dtype=bool) for _ in range(j0)]
    pending = comp.copy()
    # redraw memberships for entries that landed in no batch: conditioning
    # Ber(q)^j0 on at least one success
    while pending.any():
        rows, cols = np.nonzero(pending)
        hit_any = np.zeros(rows.size, dtype=bool)
        for b in batches:
            draw = rng.random(rows.size) < q
            b[rows[draw], cols[draw]] = True
            hit_any |= draw
        pending = np.zeros_like(pending)
        pending[rows[~hit_any], cols[~hit_any]] = True
    return SupportSet(mask=omega.mask.copy(), partition=batches, q=q)


def default_j0(n: int) -> int:
    """Standard batch count for the golfing recursion: 2 * ceil(ln n)."""
    if n < 2:
        return 1
    return 2 * math.ceil(math.log(n))


def certify_instance(
    L0: np.ndarray,
    S0: np.ndarray,
    lam: float,
    j0: Optional[int] = None,
    seed: int = 0,
    alpha: float = 0.9,
    neumann_tol: float = 1e-10,
    rank: Optional[int] = None,
) -> tuple:
    """End-to-end certificate construction and verification for (L0, S0).

    Builds T from L0, reads Omega and E off S0, attaches a golfing
    partition to the support complement (seeded), constructs
    W = W_golfing + W_neumann, and returns (report, W) where the report
    carries the combined verification plus the per-part bound checks.
    """
    L0 = ensure_matrix(L0, "L0")
    S0 = ensure_matrix(S0, "S0")
    n = L0.shape[0]
    if L0.shape != S0.shape or L0.shape[0] != L0.shape[1]:
        raise ValueError("L0 and S0 must be square matrices of equal shape")
    T = TangentSubspace.from_low_rank(L0, rank)
    mask = S0 != 0.0
    omega = SupportSet(mask=mask)
    E = np.sign(S0)
    rho = omega.count / float(n * n)
    if j0 is None:
        j0 = default_j0(n)
    omega_part = partition_support_complement(omega, j0, seed)
    sigma = opnorm_support_tangent(omega_part, T)
    W_L, _ = golfing_component(omega_part, T)
    W_S = neumann_component(
        omega_part, T, E, lam, tol=neumann_tol, support_tangent_norm=sigma
    )
    W = W_L + W_S
    report = verify_certificate(
        W, T, omega_part, E, lam, alpha=alpha, support_tangent_norm=sigma
    )
    report.wl_checks = check_golfing_bounds(
        W_L, T, omega_part, lam, support_tangent_norm=sigma
    )
    if 0.0 < rho < 1.0:
        report.ws_checks = check_sign_bounds(W_S, omega_part, E, lam, n, rho, T)
    return report, W
