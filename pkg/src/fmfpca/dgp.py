"""Monte Carlo data-generating process and rejection-frequency harness.

Paths are built from two autoregressive blocks living on randomly drawn,
mutually orthogonal Fourier directions: a trend block whose innovations are
accumulated into random walks, and a stationary block observed directly.
Innovations are a fixed 80-term Fourier expansion with geometrically
decaying coefficient scales, so every path lives (up to the deterministic
terms) in a known finite-dimensional subspace and the true trend projection
is available exactly.

By construction the two blocks' innovation coefficients are independent, so
the cross long-run covariance between trend and stationary parts vanishes.
`DgpConfig.cross_corr` optionally correlates matching coefficient pairs to
produce genuinely endogenous innovations, which is the regime where the
corrected estimator strictly improves on the preliminary one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import Legendre
from scipy.interpolate import BSpline

from .cointtest import dimension_test
from .critsim import CriticalValueTable
from .errors import ConfigError
from .fpca import DeterministicMode, FunctionalSeries
from .hilbert import Grid, GridFunction, LinearOperator
from .lrcov import KernelSpec, default_bandwidth

__all__ = [
    "DgpConfig",
    "DgpPath",
    "fourier_values",
    "generate_path",
    "rejection_experiment",
    "experiment_row",
    "EXPERIMENT_HEADER",
]

#: number of stationary autoregressive directions
_N_S_DIRECTIONS = 10

#: burn-in steps for the stationary recursions before observations start
_BURN_IN = 200


def fourier_values(j: int, points: np.ndarray) -> np.ndarray:
    """The j-th (1-based) member of the Fourier basis of L2[0,1].

    Ordering: f1 = 1, f_{2k} = sqrt(2) sin(2 pi k u), f_{2k+1} =
    sqrt(2) cos(2 pi k u).
    """
    if j < 1:
        raise ValueError("Fourier index is 1-based")
    if j == 1:
        return np.ones_like(points)
    k = j // 2
    if j % 2 == 0:
        return math.sqrt(2.0) * np.sin(2.0 * math.pi * k * points)
    return math.sqrt(2.0) * np.cos(2.0 * math.pi * k * points)


def _legendre_values(degree: int, points: np.ndarray) -> np.ndarray:
    """Shifted Legendre polynomial of the given degree on [0,1] (value 1 at u=1)."""
    return Legendre.basis(degree, domain=[0.0, 1.0])(points)


@dataclass(frozen=True)
class DgpConfig:
    """Configuration of one simulated cointegrated functional time series."""

    phi: int
    T: int
    grid_size: int = 201
    beta_range: tuple = (0.0, 0.5)
    alpha_range: tuple = (-0.5, 0.5)
    n_fourier_pool_N: int = 6
    n_fourier_pool_S: int = 12
    innovation_terms: int = 80
    innovation_decay: float = 0.95
    deterministic: DeterministicMode = DeterministicMode.NONE
    seed: int = 0
    cross_corr: float = 0.0
    presmooth_bsplines: int | None = None

    def __post_init__(self):
        if not 0 <= self.phi <= 5:
            raise ConfigError("phi must be between 0 and 5")
        if self.T < 4:
            raise ConfigError("T must be at least 4")
        if self.grid_size < 2:
            raise ConfigError("grid_size must be at least 2")
        lo, hi = self.beta_range
        if not (-1.0 < lo <= hi < 1.0):
            raise ConfigError("beta_range must lie inside (-1, 1) with lo <= hi")
        lo, hi = self.alpha_range
        if not (-1.0 < lo <= hi < 1.0):
            raise ConfigError("alpha_range must lie inside (-1, 1) with lo <= hi")
        if self.phi > self.n_fourier_pool_N:
            raise ConfigError("phi exceeds the trend-direction pool")
        if self.n_fourier_pool_S < _N_S_DIRECTIONS:
            raise ConfigError("stationary pool smaller than the directions drawn")
        if not 0.0 < self.innovation_decay < 1.0:
            raise ConfigError("innovation_decay must lie in (0, 1)")
        if self.innovation_terms < self.n_fourier_pool_N + self.n_fourier_pool_S:
            raise ConfigError("innovation expansion must cover both direction pools")
        if not 0.0 <= self.cross_corr < 1.0:
            raise ConfigError("cross_corr must lie in [0, 1)")
        if self.presmooth_bsplines is not None and self.presmooth_bsplines < 4:
            raise ConfigError("B-spline pre-smoothing needs at least 4 basis functions")


@dataclass(frozen=True)
class DgpPath:
    """One simulated path with its true trend projection and directions."""

    series: FunctionalSeries
    true_proj_N: LinearOperator
    trend_basis: tuple


def _bspline_design(points: np.ndarray, n_basis: int) -> np.ndarray:
    """Design matrix of quadratic B-splines with uniform interior knots."""
    degree = 2
    n_interior = n_basis - degree - 1
    interior = np.linspace(0.0, 1.0, n_interior + 2)[1:-1]
    knots = np.concatenate(
        [np.zeros(degree + 1), interior, np.ones(degree + 1)]
    )
    return BSpline.design_matrix(points, knots, degree).toarray()


def _presmooth(values: np.ndarray, points: np.ndarray, n_basis: int) -> np.ndarray:
    design = _bspline_design(points, n_basis)
    coefs, *_ = np.linalg.lstsq(design, values.T, rcond=None)
    return (design @ coefs).T


def generate_path(cfg: DgpConfig, rng: np.random.Generator | None = None) -> DgpPath:
    """Simulate one path.

    Draw order (fixed for reproducibility): trend directions, stationary
    directions, trend AR coefficients, stationary AR coefficients, innovation
    coefficients, then the deterministic-term coefficients.
    """
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    grid = Grid.uniform(cfg.grid_size)
    points = grid.points

    idx_n = rng.choice(cfg.n_fourier_pool_N, size=cfg.phi, replace=False)
    idx_s = (
        rng.choice(cfg.n_fourier_pool_S, size=_N_S_DIRECTIONS, replace=False)
        + cfg.n_fourier_pool_N
    )
    alphas = rng.uniform(*cfg.alpha_range, size=cfg.phi)
    betas = rng.uniform(*cfg.beta_range, size=_N_S_DIRECTIONS)

    total = cfg.T + _BURN_IN
    n_terms = cfg.innovation_terms
    theta = rng.standard_normal((total, n_terms))
    if cfg.cross_corr > 0.0 and cfg.phi > 0:
        rho = cfg.cross_corr
        pair = min(cfg.phi, _N_S_DIRECTIONS)
        for j in range(pair):
            mixed = rho * theta[:, idx_n[j]] + math.sqrt(1 - rho * rho) * theta[:, idx_s[j]]
            theta[:, idx_s[j]] = mixed
    eps = theta * cfg.innovation_decay ** np.arange(n_terms)

    # coefficient-space AR(1): feedback only on the drawn directions
    ar = np.zeros(n_terms)
    ar[idx_n] = alphas
    ar[idx_s] = betas
    e = np.empty_like(eps)
    e[0] = eps[0]
    for t in range(1, total):
        e[t] = ar * e[t - 1] + eps[t]
    e = e[_BURN_IN:]

    x_coef = e.copy()
    if cfg.phi > 0:
        x_coef[:, idx_n] = np.cumsum(e[:, idx_n], axis=0)

    basis = np.vstack([fourier_values(j + 1, points) for j in range(n_terms)])
    values = x_coef @ basis

    mode = DeterministicMode.parse(cfg.deterministic)
    if mode is not DeterministicMode.NONE:
        values = values + _random_polynomial(rng, points)
        if mode is DeterministicMode.LINEAR_TREND:
            slope = _random_polynomial(rng, points)
            values = values + np.outer(np.arange(1, cfg.T + 1, dtype=float), slope)

    if cfg.presmooth_bsplines is not None:
        values = _presmooth(values, points, cfg.presmooth_bsplines)

    series = FunctionalSeries(grid, values)
    trend_basis = tuple(
        GridFunction(grid, fourier_values(j + 1, points)) for j in idx_n
    )
    if cfg.phi == 0:
        proj = LinearOperator.zero(grid)
    else:
        coords = np.column_stack([g.coords for g in trend_basis])
        q, _ = np.linalg.qr(coords)
        proj = LinearOperator(grid, q @ q.T)
    return DgpPath(series=series, true_proj_N=proj, trend_basis=trend_basis)


def _random_polynomial(rng: np.random.Generator, points: np.ndarray) -> np.ndarray:
    """Random unit-coefficient-norm combination of the first 4 Legendre polynomials."""
    coef = rng.standard_normal(4)
    coef /= np.linalg.norm(coef)
    out = np.zeros_like(points)
    for j in range(4):
        out += coef[j] * _legendre_values(j, points)
    return out


def resolve_bandwidth(h_rule, t: int) -> float:
    """Accept 't13'/'t25' rule names or an explicit numeric bandwidth."""
    if isinstance(h_rule, str):
        try:
            return float(h_rule)
        except ValueError:
            return default_bandwidth(t, h_rule)
    return float(h_rule)


def rejection_experiment(
    cfg: DgpConfig,
    phi0: int,
    K_policy: int,
    spec: KernelSpec,
    h_rule,
    alpha: float,
    n_reps: int,
    cvt: CriticalValueTable,
    seed: int | None = None,
    progress: Callable[[int], None] | None = None,
) -> float:
    """Fraction of replications in which the dimension test rejects at alpha.

    Replication i draws its path from the substream (seed, i), with the seed
    defaulting to the configuration's, so the result does not depend on
    execution order or the degree of parallelism.
    """
    if n_reps < 1:
        raise ConfigError("n_reps must be positive")
    base_seed = cfg.seed if seed is None else seed
    h = resolve_bandwidth(h_rule, cfg.T)
    mode = DeterministicMode.parse(cfg.deterministic)
    rejections = 0
    for i in range(n_reps):
        rep_rng = np.random.default_rng(
            np.random.SeedSequence(entropy=base_seed, spawn_key=(i,))
        )
        path = generate_path(cfg, rep_rng)
        outcome = dimension_test(
            path.series, phi0, phi0 + K_policy, spec, h, mode, cvt
        )
        rejections += bool(outcome.reject[alpha])
        if progress is not None:
            progress(i + 1)
    return rejections / n_reps


EXPERIMENT_HEADER = (
    "phi,phi0,T,h_rule,K,beta_min,beta_max,mode,alpha,n_reps,reject_rate,seed"
)


def experiment_row(
    cfg: DgpConfig,
    phi0: int,
    K_policy: int,
    h_rule,
    alpha: float,
    n_reps: int,
    reject_rate: float,
) -> str:
    """One delimited result row in the harness output format."""
    mode = DeterministicMode.parse(cfg.deterministic)
    return (
        f"{cfg.phi},{phi0},{cfg.T},{h_rule},{phi0 + K_policy},"
        f"{cfg.beta_range[0]:g},{cfg.beta_range[1]:g},{mode.value},"
        f"{alpha:g},{n_reps},{reject_rate:.6f},{cfg.seed}"
    )
