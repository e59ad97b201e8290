"""Truncated coefficient-space operator models and variance functionals.

Everything lives in the orthonormal coordinates (sqrt(mu_i) e_i) of the
hypothesis space, where the population covariance is diag(mu) and the
empirical covariance built from a sample X is the rank-n matrix
(1/n) sum_k psi(x_k) psi(x_k)^T with psi_i(x) = sqrt(mu_i) e_i(x).

The conditional-variance functional

    V(lambda) = (1/n^2) sum_i || D^{(1-gamma)/2} (C_emp + lambda)^{-1} psi(x_i) ||^2

is computed by two independent routes: directly in coefficient space, and
through the n x n Gram matrix using the fractional-power kernel.  Its
population approximations V1 (empirical points, population covariance) and
V2 (fully averaged closed form) have diagonal closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, eigh
from scipy.sparse.linalg import LinearOperator, eigsh

from .kernels import SpectralKernel, gram_matrix
from .spectra import Spectrum, effective_dimension, embedding_norm

__all__ = [
    "NotInPowerSpace",
    "SingularOperator",
    "IllConditionedGram",
    "TruncatedOperatorModel",
    "VarianceCurve",
    "ConcentrationReport",
    "build_operator_model",
    "gamma_norm_sq",
    "v_lambda_coefficient_route",
    "v_lambda_gram_route",
    "v1_lambda",
    "v2_lambda",
    "norm_eq_check",
    "variance_curve",
    "concentration_trial",
]

# relative singular-value cutoff for the lambda = 0 pseudo-inverse
RANK_CUTOFF = 1e-12


class NotInPowerSpace(ArithmeticError):
    """Coefficients carry mass where the power-space weight overflows."""


class SingularOperator(np.linalg.LinAlgError):
    """Empirical covariance not invertible on the needed subspace at lambda = 0."""


class IllConditionedGram(np.linalg.LinAlgError):
    """Regularized Gram matrix too ill-conditioned to trust the solve."""

    def __init__(self, cond: float):
        super().__init__(f"condition number estimate {cond:.3e}")
        self.cond = cond


@dataclass(frozen=True)
class TruncatedOperatorModel:
    """Sample X with its coefficient map and empirical covariance."""

    kernel: SpectralKernel
    X: np.ndarray
    psi: np.ndarray  # n x M, rows are psi(x_k)
    C_emp: np.ndarray  # M x M symmetric PSD, rank <= n

    @property
    def n(self) -> int:
        return len(self.X)

    @property
    def mu(self) -> np.ndarray:
        return self.kernel.spectrum.mu


def build_operator_model(kernel: SpectralKernel, X) -> TruncatedOperatorModel:
    """Assemble psi(x_k) rows and C_emp = (1/n) sum psi psi^T."""
    X = np.atleast_1d(np.asarray(X, dtype=float))
    if len(X) < 1:
        raise ValueError("need at least one sample point")
    E = kernel.basis_matrix(X)
    psi = E * np.sqrt(kernel.spectrum.mu)
    C_emp = psi.T @ psi / len(X)
    return TruncatedOperatorModel(kernel=kernel, X=X, psi=psi, C_emp=C_emp)


def gamma_norm_sq(c, s: Spectrum, gamma: float) -> float:
    """Squared gamma-norm sum mu_i^(-gamma) c_i^2 of L2 coefficients c."""
    if not 0 <= gamma <= 1:
        raise ValueError(f"gamma must lie in [0, 1] (got {gamma})")
    c = np.asarray(c, dtype=float)
    if len(c) > s.size:
        raise ValueError("coefficient vector longer than the spectrum")
    with np.errstate(over="ignore"):
        terms = s.mu[: len(c)] ** (-gamma) * c**2
    if not np.all(np.isfinite(terms)):
        raise NotInPowerSpace("nonzero coefficients where the weight overflows")
    return float(np.sum(terms))


def _psd_solve(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Solve A Z = B for symmetric positive definite A, eigh fallback."""
    try:
        return cho_solve(cho_factor(A, lower=True), B)
    except np.linalg.LinAlgError:
        w, Q = eigh(A)
        w = np.maximum(w, np.max(w) * np.finfo(float).eps)
        return Q @ ((Q.T @ B) / w[:, None])


def _coefficient_solution(m: TruncatedOperatorModel, lam: float) -> np.ndarray:
    """Columns z_i = (C_emp + lambda)^{-1} psi(x_i), shape M x n."""
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative (got {lam})")
    if lam > 0:
        A = m.C_emp + lam * np.eye(m.C_emp.shape[0])
        return _psd_solve(A, m.psi.T)
    # lambda = 0: invert the restriction to the span of {psi(x_k)} through
    # the SVD of psi, with a relative singular-value cutoff
    U, svals, Vt = np.linalg.svd(m.psi, full_matrices=False)
    keep = svals > svals[0] * RANK_CUTOFF
    if np.count_nonzero(keep) < m.n:
        raise SingularOperator(
            f"empirical rank {np.count_nonzero(keep)} < n = {m.n} at lambda = 0"
        )
    return Vt.T @ ((m.n / svals[keep])[:, None] * U[:, keep].T)


def v_lambda_coefficient_route(m: TruncatedOperatorModel, gamma, lam: float):
    """V(lambda) evaluated in coefficient space.

    ``gamma`` may be a scalar or a sequence; the expensive linear solve is
    shared across all requested smoothness indices.
    """
    Z = _coefficient_solution(m, lam)
    row_sq = np.sum(Z**2, axis=1)  # sum over sample points, per mode
    gammas = np.atleast_1d(np.asarray(gamma, dtype=float))
    out = np.array(
        [np.sum(m.mu ** (1.0 - g) * row_sq) for g in gammas]
    ) / m.n**2
    return float(out[0]) if np.isscalar(gamma) else out


def v_lambda_gram_route(
    kernel: SpectralKernel, X, gamma: float, lam: float, cond_limit: float = 1e14
) -> float:
    """V(lambda) through the n x n Gram matrix.

    With G = K(X, X) and A = (G/n + lambda I)^{-1}, returns
    (1/n^2) tr(A K2 A) where K2 is the Gram matrix of the fractional-power
    kernel with exponent 2 - gamma.  Algebraically identical to the
    coefficient route in the truncated model.
    """
    X = np.atleast_1d(np.asarray(X, dtype=float))
    n = len(X)
    G = gram_matrix(kernel, X)
    A = G / n + lam * np.eye(n)
    w = np.linalg.eigvalsh(A)
    if w[0] <= 0 or w[-1] / w[0] > cond_limit:
        raise IllConditionedGram(np.inf if w[0] <= 0 else w[-1] / w[0])
    Ainv = _psd_solve(A, np.eye(n))
    K2 = gram_matrix(kernel, X, power=2.0 - gamma)
    return float(np.sum(Ainv * (K2 @ Ainv))) / n**2


def v1_lambda(m: TruncatedOperatorModel, gamma: float, lam: float) -> float:
    """Population-covariance approximation of V at the sampled points."""
    if lam <= 0:
        raise ValueError(f"lambda must be positive (got {lam})")
    mu = m.mu
    # e_l(x_i)^2 = psi_{il}^2 / mu_l
    e_sq_sums = np.sum(m.psi**2, axis=0) / mu
    weights = mu ** (2.0 - gamma) / (mu + lam) ** 2
    return float(np.sum(weights * e_sq_sums)) / m.n**2


def v2_lambda(s: Spectrum, gamma: float, lam: float, n: int) -> float:
    """Closed form (1/n) sum mu_i^(2-gamma) / (mu_i + lambda)^2."""
    if lam <= 0:
        raise ValueError(f"lambda must be positive (got {lam})")
    if n < 1:
        raise ValueError(f"n must be at least 1 (got {n})")
    return float(np.sum(s.mu ** (2.0 - gamma) / (s.mu + lam) ** 2)) / n


def norm_eq_check(kernel: SpectralKernel, f_coeffs_H, gamma: float) -> float:
    """Residual between the gamma-norm of [f] and || D^{(1-gamma)/2} f ||.

    ``f_coeffs_H`` are coordinates of f in the orthonormal basis
    (sqrt(mu_i) e_i); equality is exact in the truncated model for gamma < 1.
    """
    w = np.asarray(f_coeffs_H, dtype=float)
    s = kernel.spectrum
    lhs = np.sqrt(gamma_norm_sq(w * np.sqrt(s.mu[: len(w)]), s, gamma))
    rhs = float(np.linalg.norm(s.mu[: len(w)] ** ((1.0 - gamma) / 2.0) * w))
    return abs(lhs - rhs)


@dataclass(frozen=True)
class VarianceCurve:
    """V, V1, V2 along a lambda grid for one sample draw."""

    gamma: float
    lambda_grid: np.ndarray
    v: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    route: str  # coefficient | gram

    def envelope(self, beta: float, zeta: float, n: int) -> np.ndarray:
        """Shape of the predicted small-lambda lower bound (up to a constant)."""
        lam = self.lambda_grid
        return lam ** (-self.gamma - 1.0 / beta) * np.log(1.0 / lam) ** (-zeta) / n

    def to_csv(self, path, beta: float | None = None, zeta: float = 0.0, n: int = 1) -> None:
        env = (
            self.envelope(beta, zeta, n)
            if beta is not None
            else np.full_like(self.lambda_grid, np.nan)
        )
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("lambda,v,v1,v2,bound_v2_envelope\n")
            for row in zip(self.lambda_grid, self.v, self.v1, self.v2, env):
                fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


def variance_curve(
    m: TruncatedOperatorModel, gamma: float, lambda_grid, route: str = "coefficient"
) -> VarianceCurve:
    """Evaluate V, V1, V2 on a grid of positive regularization levels."""
    lam = np.asarray(lambda_grid, dtype=float)
    if lam.size == 0 or np.any(lam <= 0):
        raise ValueError("lambda grid must be non-empty and positive")
    if route == "coefficient":
        v = np.array([v_lambda_coefficient_route(m, gamma, l) for l in lam])
    elif route == "gram":
        v = np.array([v_lambda_gram_route(m.kernel, m.X, gamma, l) for l in lam])
    else:
        raise ValueError(f"unknown route {route!r}")
    v1 = np.array([v1_lambda(m, gamma, l) for l in lam])
    v2 = np.array([v2_lambda(m.kernel.spectrum, gamma, l, m.n) for l in lam])
    return VarianceCurve(gamma=gamma, lambda_grid=lam, v=v, v1=v1, v2=v2, route=route)


@dataclass(frozen=True)
class ConcentrationReport:
    """Empirical check of the operator-norm and |V1 - V2| concentration bounds."""

    n: int
    lam: float
    alpha: float
    gamma: float
    tau: float
    trials: int
    m_alpha: float
    b_nu_lambda: float
    operator_norm_bound: float
    v1_v2_bound: float
    operator_norm_satisfied: float  # fraction of trials
    v1_v2_satisfied: float
    operator_norm_median: float
    v1_v2_median: float
    target_probability: float  # 1 - 2 exp(-tau)
    # optional empirical-route comparison |V - V1| vs kappa M_alpha^2 / (n lam^{gamma+alpha})
    kappa: float | None = None
    v_v1_satisfied: float | None = None
    v_v1_median: float | None = None


def _operator_norm_statistic(m: TruncatedOperatorModel, lam: float) -> float:
    """|| (C + lam)^{-1/2} (C - C_emp) (C + lam)^{-1/2} || with diagonal C."""
    mu = m.mu
    d = mu / (mu + lam)
    B = m.psi / np.sqrt(mu + lam)
    n = m.n

    def matvec(v):
        v = np.asarray(v).ravel()
        return d * v - B.T @ (B @ v) / n

    op = LinearOperator((len(mu), len(mu)), matvec=matvec, dtype=float)
    try:
        vals = eigsh(op, k=1, which="LM", return_eigenvectors=False, tol=1e-8)
        return float(abs(vals[0]))
    except Exception:
        A = np.diag(d) - B.T @ B / n
        return float(np.max(np.abs(np.linalg.eigvalsh(A))))


def concentration_trial(
    kernel: SpectralKernel,
    n: int,
    lam: float,
    alpha: float,
    tau: float,
    trials: int,
    rng_seed: int,
    gamma: float = 0.0,
    kappa: float | None = None,
) -> ConcentrationReport:
    """Monte Carlo frequencies of the concentration bounds over draws of X.

    Per trial the report measures (a) the whitened operator-norm deviation of
    the empirical covariance against its high-probability bound and (b)
    |V1 - V2| against sqrt(tau) M_alpha^2 / (sqrt(2) n^{3/2} lam^{gamma+alpha}).
    When ``kappa`` is given, |V - V1| is additionally compared with
    kappa M_alpha^2 / (n lam^{gamma+alpha}).
    """
    if tau < 1:
        raise ValueError(f"tau must be at least 1 (got {tau})")
    spec = kernel.spectrum
    m_alpha = embedding_norm(kernel, alpha).m_alpha
    n_eff = effective_dimension(spec, lam)
    mu1 = float(spec.mu[0])
    b_nu = float(np.log(2.0 * np.e * n_eff * (mu1 + lam) / mu1))
    op_bound = (
        4.0 * m_alpha**2 * tau * b_nu / (3.0 * n * lam**alpha)
        + np.sqrt(2.0 * m_alpha**2 * tau * b_nu / (n * lam**alpha))
    )
    v_bound = np.sqrt(tau) * m_alpha**2 / (np.sqrt(2.0) * n**1.5 * lam ** (gamma + alpha))
    v2 = v2_lambda(spec, gamma, lam, n)

    rng = np.random.default_rng(rng_seed)
    op_stats, v_stats, vv1_stats = [], [], []
    for _ in range(trials):
        X = rng.random(n)
        m = build_operator_model(kernel, X)
        op_stats.append(_operator_norm_statistic(m, lam))
        v1 = v1_lambda(m, gamma, lam)
        v_stats.append(abs(v1 - v2))
        if kappa is not None:
            v = v_lambda_coefficient_route(m, gamma, lam)
            vv1_stats.append(abs(v - v1))
    op_stats = np.array(op_stats)
    v_stats = np.array(v_stats)
    report = dict(
        n=n,
        lam=lam,
        alpha=alpha,
        gamma=gamma,
        tau=tau,
        trials=trials,
        m_alpha=m_alpha,
        b_nu_lambda=b_nu,
        operator_norm_bound=float(op_bound),
        v1_v2_bound=float(v_bound),
        operator_norm_satisfied=float(np.mean(op_stats <= op_bound)),
        v1_v2_satisfied=float(np.mean(v_stats <= v_bound)),
        operator_norm_median=float(np.median(op_stats)),
        v1_v2_median=float(np.median(v_stats)),
        target_probability=float(1.0 - 2.0 * np.exp(-tau)),
    )
    if kappa is not None:
        vv1_stats = np.array(vv1_stats)
        vv1_bound = kappa * m_alpha**2 / (n * lam ** (gamma + alpha))
        report.update(
            kappa=kappa,
            v_v1_satisfied=float(np.mean(vv1_stats <= vv1_bound)),
            v_v1_median=float(np.median(vv1_stats)),
        )
    return ConcentrationReport(**report)
