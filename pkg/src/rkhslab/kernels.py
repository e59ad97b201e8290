"""Kernels with explicit Mercer decompositions.

Two families are provided:

* :class:`SpectralKernel` -- a 1-d kernel K(x, y) = sum_i mu_i e_i(x) e_i(y)
  with an explicit orthonormal basis (cosines on [0, 1] under Lebesgue
  measure, or Fourier modes on the unit circle).  The cosine basis is
  uniformly bounded by sqrt(2), which pins the embedding index at 1/beta.
* :class:`DotProductSpectrum` -- a kernel on the sphere S^d depending only on
  t = <x, x'>, diagonalized per degree with multiplicities N(d, k) and
  Gegenbauer polynomials normalized to P_k(1) = 1.

The shallow ReLU tangent-kernel profile is included as the canonical
dot-product example, together with quadrature projection of an arbitrary
profile onto its per-degree eigenvalues.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

from .spectra import Spectrum

__all__ = [
    "DomainError",
    "QuadratureError",
    "SpectralKernel",
    "DotProductSpectrum",
    "multiplicity",
    "kernel_eval",
    "fractional_power_kernel_eval",
    "gram_matrix",
    "gegenbauer_p",
    "dot_product_kernel_eval",
    "ntk_eval",
    "project_dot_product_spectrum",
]

# floating-point clamp window for |t| slightly above 1
T_CLAMP = 1e-12


class DomainError(ValueError):
    """A point lies outside the kernel's domain."""


class QuadratureError(RuntimeError):
    """Quadrature projection failed to converge under order doubling."""


@dataclass(frozen=True)
class SpectralKernel:
    """Kernel defined by a spectrum and an explicit L2-orthonormal basis."""

    spectrum: Spectrum
    basis: str = "cosine_unit_interval"  # or "circle_fourier"

    def __post_init__(self):
        if self.basis not in ("cosine_unit_interval", "circle_fourier"):
            raise ValueError(f"unknown basis {self.basis!r}")

    @property
    def size(self) -> int:
        return self.spectrum.size

    def _check_domain(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any((x < 0.0) | (x > 1.0)):
            raise DomainError("points must lie in [0, 1]")
        return x

    def basis_matrix(self, x) -> np.ndarray:
        """Evaluate all basis functions: rows are points, columns indices."""
        x = self._check_domain(x)
        M = self.size
        E = np.empty((len(x), M))
        E[:, 0] = 1.0
        if M > 1:
            k = np.arange(1, M, dtype=float)
            if self.basis == "cosine_unit_interval":
                E[:, 1:] = math.sqrt(2.0) * np.cos(np.pi * np.outer(x, k))
            else:
                # circle: pairs sqrt2 cos(2 pi j x), sqrt2 sin(2 pi j x)
                idx = np.arange(1, M)
                j = (idx + 1) // 2
                phase = 2.0 * np.pi * np.outer(x, j)
                E[:, 1:] = math.sqrt(2.0) * np.where(idx % 2 == 1, np.cos(phase), np.sin(phase))
        return E


def kernel_eval(k: SpectralKernel, x, y) -> float | np.ndarray:
    """Truncated Mercer sum sum_i mu_i e_i(x) e_i(y); symmetric in (x, y)."""
    return fractional_power_kernel_eval(k, 1.0, x, y)


def fractional_power_kernel_eval(k: SpectralKernel, s: float, x, y) -> float | np.ndarray:
    """Mercer sum with eigenvalues raised to the power s >= 0."""
    if s < 0:
        raise ValueError(f"power must be nonnegative (got {s})")
    scalar = np.isscalar(x) and np.isscalar(y)
    Ex = k.basis_matrix(x)
    Ey = k.basis_matrix(y)
    vals = (Ex * k.spectrum.mu**s) @ Ey.T
    return float(vals[0, 0]) if scalar else vals


def gram_matrix(k: SpectralKernel, X, power: float = 1.0) -> np.ndarray:
    """Gram matrix of the (fractional-power) kernel over a point set."""
    E = k.basis_matrix(X)
    return (E * k.spectrum.mu**power) @ E.T


def multiplicity(d: int, k: int) -> int:
    """Dimension N(d, k) of the degree-k spherical harmonic space on S^d."""
    if d < 1 or k < 0:
        raise ValueError("need d >= 1 and k >= 0")
    n = math.comb(k + d, k)
    if k >= 2:
        n -= math.comb(k - 2 + d, k - 2)
    return n


def _check_t(t) -> tuple[np.ndarray, bool]:
    scalar = np.isscalar(t)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(np.abs(t) > 1.0 + T_CLAMP):
        raise DomainError("inputs must satisfy |t| <= 1")
    return np.clip(t, -1.0, 1.0), scalar


def _gegenbauer_table(k_max: int, d: int, t: np.ndarray) -> np.ndarray:
    """All P_0..P_{k_max} at the given arguments, normalized so P_k(1) = 1.

    Three-term recurrence for ultraspherical polynomials with parameter
    (d - 1) / 2; the d = 1 case degenerates to Chebyshev polynomials.
    """
    P = np.empty((k_max + 1, len(t)))
    P[0] = 1.0
    if k_max == 0:
        return P
    if d == 1:
        P[1] = t
        for k in range(2, k_max + 1):
            P[k] = 2.0 * t * P[k - 1] - P[k - 2]
        return P
    nu = 0.5 * (d - 1)
    # run the recurrence at t and at 1 in parallel, then normalize
    at1 = np.empty(k_max + 1)
    P[1] = 2.0 * nu * t
    at1[0], at1[1] = 1.0, 2.0 * nu
    for k in range(2, k_max + 1):
        P[k] = (2.0 * (k - 1 + nu) * t * P[k - 1] - (k - 2 + 2 * nu) * P[k - 2]) / k
        at1[k] = (2.0 * (k - 1 + nu) * at1[k - 1] - (k - 2 + 2 * nu) * at1[k - 2]) / k
    return P / at1[:, None]


def gegenbauer_p(k: int, d: int, t) -> float | np.ndarray:
    """Degree-k Gegenbauer polynomial on [-1, 1] with P_k(1) = 1."""
    if k < 0:
        raise ValueError("degree must be nonnegative")
    t, scalar = _check_t(t)
    vals = _gegenbauer_table(k, d, t)[k]
    return float(vals[0]) if scalar else vals


@dataclass(frozen=True)
class DotProductSpectrum:
    """Per-degree eigenvalues a_k of a dot-product kernel on S^d."""

    d: int
    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        object.__setattr__(self, "a", a)
        if self.d < 1:
            raise ValueError("sphere dimension must be at least 1")
        if a.ndim != 1 or len(a) == 0:
            raise ValueError("a must be a non-empty 1-d array")
        if np.any(a < 0):
            raise ValueError("per-degree eigenvalues must be nonnegative")

    @property
    def k_max(self) -> int:
        return len(self.a) - 1

    def multiplicities(self) -> np.ndarray:
        return np.array([multiplicity(self.d, k) for k in range(len(self.a))], dtype=float)

    def trace(self) -> float:
        """K(x, x) = sum_k a_k N(d, k), constant on the sphere."""
        return float(np.sum(self.a * self.multiplicities()))

    def to_json(self) -> str:
        return json.dumps(
            {"d": self.d, "a": self.a.tolist(), "N": self.multiplicities().astype(int).tolist()},
            sort_keys=True,
        )


def dot_product_kernel_eval(s: DotProductSpectrum, t) -> float | np.ndarray:
    """K(t) = sum_k a_k N(d, k) P_k(t) for t = <x, x'>."""
    t, scalar = _check_t(t)
    P = _gegenbauer_table(s.k_max, s.d, t)
    vals = (s.a * s.multiplicities()) @ P
    return float(vals[0]) if scalar else vals


def ntk_eval(t) -> float | np.ndarray:
    """Shallow ReLU tangent-kernel profile (2/pi) t (pi - arccos t) + (1/pi) sqrt(1 - t^2)."""
    t, scalar = _check_t(t)
    vals = (2.0 / np.pi) * t * (np.pi - np.arccos(t)) + np.sqrt(1.0 - t**2) / np.pi
    return float(vals[0]) if scalar else vals


def project_dot_product_spectrum(
    g,
    d: int,
    k_max: int,
    quad_order: int | None = None,
    rtol: float = 1e-6,
    max_doublings: int = 8,
) -> DotProductSpectrum:
    """Recover per-degree eigenvalues a_k of a scalar profile g on [-1, 1].

    Uses Gauss-Jacobi quadrature with the sphere weight (1 - t^2)^(d/2 - 1);
    the normalization constants are obtained from the numerically computed
    Gegenbauer self-products under the same rule, so exactness of polynomial
    integration makes the projection self-consistent.  The order is doubled
    until the coefficients stabilize to ``rtol``.
    """
    if quad_order is None:
        quad_order = max(2 * (k_max + 1), 64)
    if quad_order < k_max + 1:
        raise ValueError("quad_order must be at least k_max + 1")
    nmult = np.array([multiplicity(d, k) for k in range(k_max + 1)], dtype=float)

    def coeffs(order: int) -> np.ndarray:
        x, w = roots_jacobi(order, d / 2 - 1, d / 2 - 1)
        P = _gegenbauer_table(k_max, d, x)
        gv = np.asarray(g(x), dtype=float)
        norms = (P**2) @ w
        return (P @ (w * gv)) / (nmult * norms)

    a = coeffs(quad_order)
    for _ in range(max_doublings):
        quad_order *= 2
        a_next = coeffs(quad_order)
        change = np.max(np.abs(a_next - a)) / max(np.max(np.abs(a_next)), np.finfo(float).tiny)
        a = a_next
        if change < rtol:
            break
    else:
        raise QuadratureError(
            f"projection did not stabilize to {rtol} after {max_doublings} order doublings"
        )

    if np.any(a < -1e-10):
        raise ValueError(
            f"profile is not positive definite: min coefficient {a.min():.3e}"
        )
    if np.any(a < 0):
        warnings.warn("small negative coefficients clamped to zero", stacklevel=2)
        a = np.maximum(a, 0.0)
    return DotProductSpectrum(d=d, a=a)
