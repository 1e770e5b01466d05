"""Kernel-bandwidth long-run covariance estimation.

Provides the operator-valued two-sided and one-sided long-run covariance
estimators for a functional series, and the matrix-valued long-run variance
of a finite-dimensional series used inside test statistics. Lag weights come
from a compactly supported kernel evaluated at s/h; the bandwidth h is
real-valued and never floored to an integer.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NonPositiveBandwidth, TooShort
from .fpca import FunctionalSeries
from .hilbert import LinearOperator

__all__ = [
    "KernelSpec",
    "LrcovPair",
    "kernel_weight",
    "operator_lrcov",
    "vector_lrv",
    "default_bandwidth",
]


def _parzen(u: float) -> float:
    if u <= 0.5:
        return 1.0 - 6.0 * u * u + 6.0 * u * u * u
    if u <= 1.0:
        return 2.0 * (1.0 - u) ** 3
    return 0.0


def _bartlett(u: float) -> float:
    return 1.0 - u if u <= 1.0 else 0.0


def _flat(u: float) -> float:
    return 1.0 if u <= 1.0 else 0.0


@dataclass(frozen=True)
class KernelSpec:
    """A lag-weight kernel: k(0) = 1, k(u) = 0 beyond the support bound kappa."""

    family: str
    kappa: float
    evaluator: Callable[[float], float]

    @classmethod
    def parzen(cls) -> "KernelSpec":
        return cls("parzen", 1.0, _parzen)

    @classmethod
    def bartlett(cls) -> "KernelSpec":
        return cls("bartlett", 1.0, _bartlett)

    @classmethod
    def truncated_flat(cls) -> "KernelSpec":
        return cls("flat", 1.0, _flat)

    @classmethod
    def parse(cls, label: "str | KernelSpec") -> "KernelSpec":
        if isinstance(label, cls):
            return label
        key = str(label).strip().lower()
        table = {
            "parzen": cls.parzen,
            "bartlett": cls.bartlett,
            "flat": cls.truncated_flat,
            "truncated_flat": cls.truncated_flat,
        }
        if key not in table:
            raise ValueError(f"unknown kernel family: {label!r}")
        return table[key]()


def kernel_weight(spec: KernelSpec, u: float) -> float:
    """Evaluate the kernel at a nonnegative lag ratio u = s/h."""
    if u < 0:
        raise ValueError("the kernel argument must be nonnegative")
    if u > spec.kappa:
        return 0.0
    return float(spec.evaluator(float(u)))


@dataclass(frozen=True)
class LrcovPair:
    """Two-sided (omega) and one-sided (gamma) long-run covariance estimates.

    `lambda0` is the lag-zero term; the algebraic identity
    omega = gamma + gamma* - lambda0 holds by construction.
    """

    omega: LinearOperator
    gamma: LinearOperator
    lambda0: LinearOperator
    bandwidth_used: float


def _lag_weights(spec: KernelSpec, h: float, n: int) -> np.ndarray:
    """Kernel weights k(s/h) for s = 1..n-1 (zeros beyond the support)."""
    max_lag = min(n - 1, int(np.floor(spec.kappa * h)))
    w = np.zeros(max(max_lag, 0))
    for s in range(1, max_lag + 1):
        w[s - 1] = kernel_weight(spec, s / h)
    return w


def operator_lrcov(z: FunctionalSeries, spec: KernelSpec, h: float) -> LrcovPair:
    """Operator-valued long-run covariance of a (presumed stationary) series.

    With n observations,

        lambda0 = n^{-1} sum_t Z_t (x) Z_t
        gamma   = lambda0 + n^{-1} sum_s k(s/h) sum_{t>s} Z_t (x) Z_{t-s}
        omega   = lambda0 + n^{-1} sum_s k(s/h) sum_{t>s} {Z_t (x) Z_{t-s}
                                                           + Z_{t-s} (x) Z_t}.
    """
    if h <= 0:
        raise NonPositiveBandwidth(f"bandwidth must be positive, got {h}")
    n = len(z)
    if n < 2:
        raise TooShort("long-run covariance needs at least 2 observations")
    c = z.coords
    lam0 = (c.T @ c) / n
    one_sided = np.zeros_like(lam0)
    for s, w in enumerate(_lag_weights(spec, h, n), start=1):
        if w == 0.0:
            continue
        # sum_{t>s} Z_t (x) Z_{t-s} has coefficient matrix sum outer(Z_{t-s}, Z_t)
        one_sided += w * (c[:-s].T @ c[s:])
    one_sided /= n
    gamma = lam0 + one_sided
    omega = lam0 + one_sided + one_sided.T
    return LrcovPair(
        omega=LinearOperator(z.grid, omega),
        gamma=LinearOperator(z.grid, gamma),
        lambda0=LinearOperator(z.grid, lam0),
        bandwidth_used=float(h),
    )


def vector_lrv(z: np.ndarray, spec: KernelSpec, h: float) -> np.ndarray:
    """Long-run variance matrix of an n x K series (same weights as above).

    Warns (without failing) when the result is not positive definite; the
    caller decides whether a singular long-run variance is an error.
    """
    if h <= 0:
        raise NonPositiveBandwidth(f"bandwidth must be positive, got {h}")
    z = np.asarray(z, dtype=float)
    if z.ndim == 1:
        z = z[:, None]
    n = z.shape[0]
    if n < 2:
        raise TooShort("long-run variance needs at least 2 observations")
    lam0 = (z.T @ z) / n
    one_sided = np.zeros_like(lam0)
    for s, w in enumerate(_lag_weights(spec, h, n), start=1):
        if w == 0.0:
            continue
        one_sided += w * (z[:-s].T @ z[s:])
    one_sided /= n
    out = lam0 + one_sided + one_sided.T
    out = (out + out.T) / 2.0
    if np.linalg.eigvalsh(out)[0] <= 0.0:
        warnings.warn(
            "long-run variance matrix is not positive definite", stacklevel=2
        )
    return out


def default_bandwidth(t: int, rule: str) -> float:
    """The bandwidth rules T^(1/3) ('t13') and T^(2/5) ('t25'), unrounded."""
    if t < 2:
        raise TooShort("bandwidth rules require a sample of at least 2")
    key = str(rule).strip().lower()
    exponents = {"t13": 1.0 / 3.0, "t25": 2.0 / 5.0}
    if key not in exponents:
        raise ValueError(f"unknown bandwidth rule: {rule!r} (use 't13' or 't25')")
    return float(t) ** exponents[key]
