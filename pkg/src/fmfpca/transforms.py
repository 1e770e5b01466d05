"""Observation-space embeddings for empirical pipelines.

Rate curves in (0,1) are mapped into an unconstrained function space by a
pointwise logit. Density-valued observations are embedded into the zero-mean
square-integrable functions by the centered log-ratio map, whose inverse is
exponentiate-and-normalize; the pair is an isometric round trip on the set
of strictly positive densities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveDensity, NotCentered, OutOfDomain
from .hilbert import Grid, GridFunction

__all__ = [
    "DensityFunction",
    "logit_curve",
    "clr_transform",
    "inverse_clr",
]

#: density values at or below this floor are rejected (never clipped: clipping
#: would silently corrupt the log geometry)
DENSITY_FLOOR = 1e-12

#: tolerance on the unit integral of a density
DENSITY_NORM_TOL = 1e-6

#: tolerance on the quadrature mean of a function to be exponentiated back
CENTER_TOL = 1e-6

#: largest exponent spread accepted before exp() would degenerate
MAX_EXP_SPREAD = 700.0


@dataclass(frozen=True)
class DensityFunction:
    """A probability density on a grid: positive values integrating to one."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=float)
        if values.ndim != 1 or values.size != len(self.grid):
            raise ValueError("values must be 1-d with one entry per grid point")
        if np.any(values < DENSITY_FLOOR):
            raise NonPositiveDensity(
                f"density values must exceed the floor {DENSITY_FLOOR:g}; "
                "truncate the support before constructing the density"
            )
        total = float(values @ self.grid.quad_weights)
        if abs(total - 1.0) > DENSITY_NORM_TOL:
            raise ValueError(
                f"density must integrate to 1 under the grid quadrature "
                f"(got {total:.8f})"
            )
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def as_function(self) -> GridFunction:
        return GridFunction(self.grid, self.values)


def logit_curve(f: GridFunction) -> GridFunction:
    """Pointwise log(v / (1 - v)) for a curve with values strictly in (0,1)."""
    v = f.values
    bad = (v <= 0.0) | (v >= 1.0)
    if np.any(bad):
        raise OutOfDomain(
            "logit requires values strictly inside (0,1); offending points: "
            f"{f.grid.points[bad].tolist()}",
            offending_points=f.grid.points[bad],
        )
    return GridFunction(f.grid, np.log(v / (1.0 - v)))


def clr_transform(x: DensityFunction) -> GridFunction:
    """Centered log-ratio: log density minus its mean log over the support.

    The output has zero quadrature mean (re-centered explicitly so the
    invariant holds to machine precision).
    """
    log_v = np.log(x.values)
    length = float(np.sum(x.grid.quad_weights))
    mean = float(log_v @ x.grid.quad_weights) / length
    centered = log_v - mean
    # one more exact centering pass to kill roundoff in the mean
    centered -= float(centered @ x.grid.quad_weights) / length
    return GridFunction(x.grid, centered)


def inverse_clr(f: GridFunction) -> DensityFunction:
    """Exponentiate and normalize a zero-quadrature-mean function.

    Functions whose mean deviates from zero by no more than the tolerance are
    re-centered first; larger deviations raise :class:`NotCentered`. A spread
    of values beyond what exp() can represent raises rather than returning
    infinities.
    """
    length = float(np.sum(f.grid.quad_weights))
    mean = float(f.values @ f.grid.quad_weights) / length
    if abs(mean) > CENTER_TOL:
        raise NotCentered(
            f"quadrature mean {mean:.3e} exceeds the tolerance {CENTER_TOL:g}"
        )
    v = f.values - mean
    if float(v.max() - v.min()) > MAX_EXP_SPREAD:
        raise OutOfDomain(
            "value spread too large to exponentiate without overflow"
        )
    expv = np.exp(v)
    total = float(expv @ f.grid.quad_weights)
    return DensityFunction(f.grid, expv / total)
