"""Sample covariance operators, deterministic-term removal, and ordinary FPCA.

The preliminary trend/stationary split of a functional time series comes from
the eigendecomposition of its sample covariance operator: the span of the top
`phi` eigenfunctions estimates the attractor (unit-root) subspace, and its
orthogonal complement estimates the cointegrating subspace. Deterministic
components (a constant level or a linear time trend) are removed beforehand
by exact closed-form residualization.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import NonFinite, PhiTooLarge, TooShort
from .hilbert import (
    EigenSystem,
    Grid,
    GridFunction,
    LinearOperator,
    eigendecompose,
)

__all__ = [
    "DeterministicMode",
    "FunctionalSeries",
    "FpcaResult",
    "sample_covariance",
    "residualize",
    "ordinary_fpca",
]


class DeterministicMode(Enum):
    """Deterministic component assumed present in the observed series."""

    NONE = "none"
    CONSTANT = "const"
    LINEAR_TREND = "trend"

    @classmethod
    def parse(cls, label: "str | DeterministicMode") -> "DeterministicMode":
        if isinstance(label, cls):
            return label
        key = str(label).strip().lower()
        aliases = {
            "none": cls.NONE,
            "const": cls.CONSTANT,
            "constant": cls.CONSTANT,
            "trend": cls.LINEAR_TREND,
            "linear_trend": cls.LINEAR_TREND,
        }
        if key not in aliases:
            raise ValueError(f"unknown deterministic mode: {label!r}")
        return aliases[key]


class FunctionalSeries:
    """An ordered sample of functions sharing one grid.

    Stored internally as a T x p value matrix; `coords` gives the same data
    in orthonormal coordinates, which is the representation every estimator
    in this package works in.
    """

    __slots__ = ("grid", "values", "_coords")

    def __init__(self, grid: Grid, values: np.ndarray):
        values = np.ascontiguousarray(values, dtype=float)
        if values.ndim != 2:
            raise ValueError("values must be a T x p matrix")
        if values.shape[0] < 1:
            raise TooShort("a functional series needs at least one observation")
        if values.shape[1] != len(grid):
            raise ValueError("each row must have one value per grid point")
        if not np.all(np.isfinite(values)):
            raise NonFinite("series values must be finite")
        values.flags.writeable = False
        self.grid = grid
        self.values = values
        self._coords = None

    @classmethod
    def from_functions(cls, functions: Sequence[GridFunction] | Iterable[GridFunction]):
        functions = list(functions)
        if not functions:
            raise TooShort("a functional series needs at least one observation")
        grid = functions[0].grid
        for f in functions[1:]:
            grid.require_compatible(f.grid)
        return cls(grid, np.vstack([f.values for f in functions]))

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def coords(self) -> np.ndarray:
        """T x p matrix of observations in orthonormal coordinates."""
        if self._coords is None:
            c = self.values * self.grid.sqrt_weights
            c.flags.writeable = False
            self._coords = c
        return self._coords

    def observation(self, t: int) -> GridFunction:
        """The t-th observation (0-based) as a GridFunction."""
        return GridFunction(self.grid, self.values[t])

    def __iter__(self):
        for t in range(len(self)):
            yield self.observation(t)

    @classmethod
    def from_coords(cls, grid: Grid, coords: np.ndarray) -> "FunctionalSeries":
        return cls(grid, np.asarray(coords, dtype=float) / grid.sqrt_weights)


@dataclass(frozen=True)
class FpcaResult:
    """Preliminary projection estimators and the covariance spectrum."""

    proj_N: LinearOperator
    proj_S: LinearOperator
    spectrum: EigenSystem
    phi: int


def sample_covariance(x: FunctionalSeries) -> LinearOperator:
    """The covariance operator T^{-1} sum_t X_t (x) X_t (not mean-centered)."""
    c = x.coords
    return LinearOperator(x.grid, (c.T @ c) / c.shape[0])


def residualize(x: FunctionalSeries, mode: DeterministicMode) -> FunctionalSeries:
    """Remove the deterministic component by exact closed forms.

    CONSTANT subtracts the sample mean function. LINEAR_TREND additionally
    removes a linear time trend via the centered regressor t - (T+1)/2, so
    the residuals are orthogonal to both the constant and the trend exactly.
    """
    mode = DeterministicMode.parse(mode)
    if mode is DeterministicMode.NONE:
        return x
    tt = len(x)
    values = x.values - x.values.mean(axis=0)
    if mode is DeterministicMode.CONSTANT:
        return FunctionalSeries(x.grid, values)
    if tt < 3:
        raise TooShort("detrending needs at least 3 observations")
    c = np.arange(1, tt + 1, dtype=float) - (tt + 1) / 2.0
    slope = (c @ values) / (c @ c)
    return FunctionalSeries(x.grid, values - np.outer(c, slope))


def ordinary_fpca(
    x: FunctionalSeries,
    phi: int,
    mode: DeterministicMode = DeterministicMode.NONE,
) -> FpcaResult:
    """Eigendecompose the (residualized) sample covariance operator.

    The projection onto the span of the first `phi` eigenfunctions estimates
    the attractor subspace; its complement estimates the cointegrating
    subspace. ``phi = 0`` yields the zero projection, which is the starting
    point of the sequential dimension procedure.
    """
    p = len(x.grid)
    if phi < 0:
        raise ValueError("phi must be nonnegative")
    if phi > p or phi > len(x):
        raise PhiTooLarge(
            f"phi={phi} exceeds the available dimension (p={p}, T={len(x)})"
        )
    u = residualize(x, mode)
    spectrum = eigendecompose(sample_covariance(u))
    v = spectrum.coords_matrix(phi)
    proj_n = LinearOperator(x.grid, v @ v.T)
    proj_s = LinearOperator.identity(x.grid) - proj_n
    return FpcaResult(proj_N=proj_n, proj_S=proj_s, spectrum=spectrum, phi=phi)
