"""Tests for the dimension of the trend subspace and for subspace hypotheses.

The dimension test projects the endogeneity-corrected series onto
eigenfunctions phi0+1..K of the corrected eigenproblem and applies a
KPSS-type statistic: the normalized sum of squared partial sums in the
metric of the series' own long-run variance. Small values support
stationarity of the projected series (the hypothesized dimension is
sufficient); the statistic diverges when trend directions remain.

Applied sequentially from phi0 = 0 upward, the first non-rejection
estimates the trend-space dimension. Hypotheses that a given subspace lies
inside the trend space, or contains it, reduce to dimension tests on the
series of residuals from that subspace.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .critsim import CriticalValueTable
from .errors import DimMismatch, KOutOfRange, SingularLrv
from .fpca import DeterministicMode, FunctionalSeries
from .hilbert import GridFunction, orthonormalize_coords
from .lrcov import KernelSpec, vector_lrv
from .modified import modified_fpca

__all__ = [
    "TestOutcome",
    "SequentialResult",
    "kpss_core",
    "dimension_test",
    "sequential_dimension",
    "subspace_in_attractor_test",
    "attractor_in_subspace_test",
]

_SINGULAR_RTOL = 1e-10


@dataclass(frozen=True)
class TestOutcome:
    """A single test: statistic, decisions, and the projected series used."""

    statistic: float
    K: int
    phi0: int
    mode: DeterministicMode
    critical_values: dict
    reject: dict
    projected_series: np.ndarray

    def summary(self) -> dict:
        """JSON-friendly view (without the projected series)."""
        return {
            "phi0": self.phi0,
            "K": self.K,
            "mode": self.mode.value,
            "statistic": self.statistic,
            "critical_values": {f"{a:g}": cv for a, cv in self.critical_values.items()},
            "reject": {f"{a:g}": bool(r) for a, r in self.reject.items()},
        }


@dataclass(frozen=True)
class SequentialResult:
    """Outcome of the sequential dimension search."""

    phi_hat: int
    trajectory: tuple
    alpha: float
    cap_reached: bool = False


def kpss_core(z: np.ndarray, spec: KernelSpec, h: float) -> float:
    """The quadratic-form statistic n^{-2} sum_t S_t' LRV(z)^{-1} S_t.

    S_t are the running partial sums of the rows of the n x K series `z`.
    The series is used as supplied; any demeaning or detrending must happen
    upstream. Raises :class:`SingularLrv` when the long-run variance matrix
    is numerically singular (a degenerate projection direction).
    """
    z = np.asarray(z, dtype=float)
    if z.ndim == 1:
        z = z[:, None]
    n = z.shape[0]
    if n < 2:
        raise ValueError("the statistic needs at least 2 observations")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lrv = vector_lrv(z, spec, h)
    eigvals = np.linalg.eigvalsh(lrv)
    if eigvals[0] <= _SINGULAR_RTOL * max(eigvals[-1], 0.0):
        raise SingularLrv(
            "long-run variance of the projected series is numerically singular"
        )
    s = np.cumsum(z, axis=0)
    quad = np.sum(s * np.linalg.solve(lrv, s.T).T)
    return float(quad) / (n * n)


def _decisions(cvt: CriticalValueTable, mode, dim_w, dim_b, statistic):
    by_level = cvt.lookup(mode, dim_w, dim_b)
    critical = {round(1.0 - level, 12): q for level, q in by_level.items()}
    reject = {alpha: statistic > q for alpha, q in critical.items()}
    return critical, reject


def dimension_test(
    x: FunctionalSeries,
    phi0: int,
    K: int,
    spec: KernelSpec,
    h: float,
    mode: DeterministicMode,
    cvt: CriticalValueTable,
) -> TestOutcome:
    """Test that the trend subspace has dimension phi0, against larger.

    Runs the corrected eigenproblem at `phi0`, projects the corrected series
    onto eigenfunctions phi0+1..K, and compares the KPSS-type statistic with
    the simulated quantiles for (mode, K - phi0, phi0).
    """
    mode = DeterministicMode.parse(mode)
    p = len(x.grid)
    if not phi0 < K <= p:
        raise KOutOfRange(f"need phi0 < K <= p, got phi0={phi0}, K={K}, p={p}")
    mf = modified_fpca(x, phi0, spec, h, mode)
    w = mf.spectrum.coords_matrix(K)[:, phi0:K]
    z = mf.modified_series.coords @ w
    statistic = kpss_core(z, spec, h)
    critical, reject = _decisions(cvt, mode, K - phi0, phi0, statistic)
    return TestOutcome(
        statistic=statistic,
        K=K,
        phi0=phi0,
        mode=mode,
        critical_values=critical,
        reject=reject,
        projected_series=z,
    )


def sequential_dimension(
    x: FunctionalSeries,
    alpha: float,
    K_policy: int,
    spec: KernelSpec,
    h: float,
    mode: DeterministicMode,
    cvt: CriticalValueTable,
    phi_cap: int | None = None,
) -> SequentialResult:
    """Estimate the trend dimension: test phi0 = 0, 1, ... until non-rejection.

    Each stage uses K = phi0 + K_policy. The estimate is the first phi0 not
    rejected at `alpha`; if every stage up to `phi_cap` rejects, the estimate
    is the cap and the result is flagged (never silent).
    """
    if K_policy < 1:
        raise ValueError("K_policy must be at least 1")
    p = len(x.grid)
    t = len(x)
    if phi_cap is None:
        phi_cap = min(p - K_policy, max(t // 10, 0))
    if phi_cap > p - K_policy:
        raise KOutOfRange(f"phi_cap={phi_cap} leaves no room for K = phi0 + {K_policy}")
    trajectory = []
    for phi0 in range(phi_cap + 1):
        outcome = dimension_test(x, phi0, phi0 + K_policy, spec, h, mode, cvt)
        if alpha not in outcome.reject:
            raise KOutOfRange(
                f"no critical value stored for alpha={alpha}; available: "
                f"{sorted(outcome.reject)}"
            )
        trajectory.append(outcome)
        if not outcome.reject[alpha]:
            return SequentialResult(
                phi_hat=phi0, trajectory=tuple(trajectory), alpha=alpha
            )
    warnings.warn(
        f"sequential search rejected every dimension up to the cap {phi_cap}; "
        "the estimate equals the cap",
        stacklevel=2,
    )
    return SequentialResult(
        phi_hat=phi_cap, trajectory=tuple(trajectory), alpha=alpha, cap_reached=True
    )


def _residual_series(
    x: FunctionalSeries, m: Sequence[GridFunction]
) -> tuple[FunctionalSeries, int]:
    """Project the series onto the orthogonal complement of span(m)."""
    coords = np.column_stack([v.coords for v in m]) if m else np.zeros((len(x.grid), 0))
    for v in m:
        x.grid.require_compatible(v.grid)
    q = orthonormalize_coords(coords)
    c = x.coords
    resid = c - (c @ q) @ q.T
    return FunctionalSeries.from_coords(x.grid, resid), q.shape[1]


def subspace_in_attractor_test(
    x: FunctionalSeries,
    m: Sequence[GridFunction],
    phi: int,
    K: int,
    spec: KernelSpec,
    h: float,
    mode: DeterministicMode,
    cvt: CriticalValueTable,
) -> TestOutcome:
    """Test that span(m) lies inside the trend subspace of known dimension phi.

    Under the hypothesis, removing span(m) from the observations leaves a
    trend subspace of dimension phi - dim(m); that dimension is tested.
    """
    resid, dim_m = _residual_series(x, m)
    if dim_m > phi:
        raise DimMismatch(
            f"the hypothesized subspace has dimension {dim_m} > phi = {phi}"
        )
    return dimension_test(resid, phi - dim_m, K, spec, h, mode, cvt)


def attractor_in_subspace_test(
    x: FunctionalSeries,
    m: Sequence[GridFunction],
    K: int,
    spec: KernelSpec,
    h: float,
    mode: DeterministicMode,
    cvt: CriticalValueTable,
) -> TestOutcome:
    """Test that the trend subspace is contained in span(m).

    Under the hypothesis the residual series from span(m) is stationary, so
    the dimension test applies with phi0 = 0.
    """
    if not m:
        raise DimMismatch("the hypothesized containing subspace must be nonempty")
    resid, _ = _residual_series(x, m)
    return dimension_test(resid, 0, K, spec, h, mode, cvt)
