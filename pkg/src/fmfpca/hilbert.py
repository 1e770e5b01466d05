"""Discretized Hilbert-space arithmetic.

Functions on a common grid form a finite-dimensional proxy of a separable
Hilbert space: the inner product is a quadrature sum, and bounded operators
are dense matrices. All operator coefficients are stored in *orthonormal
coordinates*, i.e. after the change of variable ``x_tilde = sqrt(w) * x``
where ``w`` are the quadrature weights. In these coordinates the inner
product is the plain dot product and the adjoint of an operator is the
transpose of its coefficient matrix, so standard symmetric eigensolvers
apply without weighted-adjoint bookkeeping.

All objects are immutable after construction (backing arrays are marked
read-only), hence safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    GridMismatch,
    NonFinite,
    NotOrthonormal,
    NotSelfAdjoint,
    RankDeficient,
)

__all__ = [
    "Grid",
    "GridFunction",
    "LinearOperator",
    "EigenSystem",
    "inner_product",
    "tensor",
    "eigendecompose",
    "regularized_inverse",
    "projection_from",
]

#: relative tolerance for rank decisions (scaled by the largest eigenvalue)
TOL_RANK = 1e-10

#: relative tolerance for treating an operator as self-adjoint
TOL_SYMMETRY = 1e-10

#: tolerance for accepting a nearly orthonormal family (re-orthonormalized)
TOL_ORTHONORMAL = 1e-8


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Grid:
    """Fixed abscissae with quadrature weights.

    Parameters
    ----------
    points : array_like
        Strictly increasing abscissae, at least two of them.
    quad_weights : array_like
        Nonnegative quadrature weights, one per point. For the default
        trapezoid construction the weights sum to the domain length.
    """

    points: np.ndarray
    quad_weights: np.ndarray

    def __post_init__(self):
        points = _readonly(np.asarray(self.points, dtype=float))
        weights = _readonly(np.asarray(self.quad_weights, dtype=float))
        if points.ndim != 1 or weights.ndim != 1:
            raise ValueError("grid points and weights must be 1-d arrays")
        if points.size < 2:
            raise ValueError("a grid needs at least 2 points")
        if points.size != weights.size:
            raise ValueError("points and quad_weights must have equal length")
        if not np.all(np.isfinite(points)) or not np.all(np.isfinite(weights)):
            raise NonFinite("grid points and weights must be finite")
        if np.any(np.diff(points) <= 0):
            raise ValueError("grid points must be strictly increasing")
        if np.any(weights < 0):
            raise ValueError("quadrature weights must be nonnegative")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "quad_weights", weights)
        object.__setattr__(self, "_sqrt_w", _readonly(np.sqrt(weights)))

    @classmethod
    def trapezoid(cls, points) -> "Grid":
        """Grid with trapezoid-rule weights on the given abscissae."""
        points = np.asarray(points, dtype=float)
        d = np.diff(points)
        w = np.zeros_like(points)
        w[:-1] += d / 2.0
        w[1:] += d / 2.0
        return cls(points, w)

    @classmethod
    def uniform(cls, num_points: int, start: float = 0.0, stop: float = 1.0) -> "Grid":
        """Uniform trapezoid grid with `num_points` points on [start, stop]."""
        return cls.trapezoid(np.linspace(start, stop, num_points))

    def __len__(self) -> int:
        return self.points.size

    @property
    def size(self) -> int:
        return self.points.size

    @property
    def sqrt_weights(self) -> np.ndarray:
        return self._sqrt_w

    @property
    def domain_length(self) -> float:
        return float(self.points[-1] - self.points[0])

    def compatible(self, other: "Grid") -> bool:
        if self is other:
            return True
        return np.array_equal(self.points, other.points) and np.array_equal(
            self.quad_weights, other.quad_weights
        )

    def require_compatible(self, other: "Grid") -> None:
        if not self.compatible(other):
            raise GridMismatch("objects are defined on different grids")

    def values_from_coords(self, coords: np.ndarray) -> np.ndarray:
        """Invert the orthonormal change of coordinates (needs positive weights)."""
        if np.any(self.quad_weights == 0.0):
            raise ValueError(
                "cannot map coordinates back to values on a grid with zero weights"
            )
        return np.asarray(coords, dtype=float) / self._sqrt_w


@dataclass(frozen=True)
class GridFunction:
    """A single functional observation: values at the grid points."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = _readonly(np.asarray(self.values, dtype=float))
        if values.ndim != 1 or values.size != len(self.grid):
            raise ValueError("values must be 1-d with one entry per grid point")
        if not np.all(np.isfinite(values)):
            raise NonFinite("function values must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_coords(cls, grid: Grid, coords: np.ndarray) -> "GridFunction":
        return cls(grid, grid.values_from_coords(coords))

    @property
    def coords(self) -> np.ndarray:
        """Representation in orthonormal coordinates, sqrt(w) * values."""
        return self.values * self.grid.sqrt_weights

    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self.grid.require_compatible(other.grid)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self.grid.require_compatible(other.grid)
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, scalar: float) -> "GridFunction":
        return GridFunction(self.grid, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "GridFunction":
        return GridFunction(self.grid, -self.values)


@dataclass(frozen=True)
class LinearOperator:
    """Bounded operator on the discretized space.

    `coeffs` is the p x p coefficient matrix in orthonormal coordinates, so
    the adjoint is exactly the transpose and composition is matrix product.
    """

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = _readonly(np.asarray(self.coeffs, dtype=float))
        p = len(self.grid)
        if coeffs.shape != (p, p):
            raise ValueError(f"coeffs must be {p}x{p} for this grid")
        if not np.all(np.isfinite(coeffs)):
            raise NonFinite("operator coefficients must be finite")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zero(cls, grid: Grid) -> "LinearOperator":
        return cls(grid, np.zeros((len(grid), len(grid))))

    @classmethod
    def identity(cls, grid: Grid) -> "LinearOperator":
        return cls(grid, np.eye(len(grid)))

    def apply(self, f: GridFunction) -> GridFunction:
        self.grid.require_compatible(f.grid)
        return GridFunction.from_coords(self.grid, self.coeffs @ f.coords)

    def __call__(self, f: GridFunction) -> GridFunction:
        return self.apply(f)

    def adjoint(self) -> "LinearOperator":
        return LinearOperator(self.grid, self.coeffs.T)

    def compose(self, other: "LinearOperator") -> "LinearOperator":
        """self after other, (self @ other)(x) = self(other(x))."""
        self.grid.require_compatible(other.grid)
        return LinearOperator(self.grid, self.coeffs @ other.coeffs)

    __matmul__ = compose

    def __add__(self, other: "LinearOperator") -> "LinearOperator":
        self.grid.require_compatible(other.grid)
        return LinearOperator(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "LinearOperator") -> "LinearOperator":
        self.grid.require_compatible(other.grid)
        return LinearOperator(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "LinearOperator":
        return LinearOperator(self.grid, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "LinearOperator":
        return LinearOperator(self.grid, -self.coeffs)

    def norm(self) -> float:
        """Operator (spectral) norm."""
        return float(np.linalg.norm(self.coeffs, 2))

    def asymmetry(self) -> float:
        """Largest absolute entry of coeffs - coeffs'."""
        return float(np.max(np.abs(self.coeffs - self.coeffs.T), initial=0.0))

    def symmetrized(self) -> "LinearOperator":
        return LinearOperator(self.grid, (self.coeffs + self.coeffs.T) / 2.0)

    def rank(self, rtol: float = TOL_RANK) -> int:
        s = np.linalg.svd(self.coeffs, compute_uv=False)
        if s.size == 0 or s[0] == 0.0:
            return 0
        return int(np.sum(s > rtol * s[0]))


@dataclass(frozen=True)
class EigenSystem:
    """Descending eigenvalues with orthonormal eigenfunctions."""

    eigenvalues: np.ndarray
    eigenvectors: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "eigenvalues", _readonly(np.asarray(self.eigenvalues, dtype=float))
        )
        object.__setattr__(self, "eigenvectors", tuple(self.eigenvectors))
        if len(self.eigenvectors) != self.eigenvalues.size:
            raise ValueError("one eigenvector per eigenvalue required")

    @property
    def grid(self) -> Grid:
        return self.eigenvectors[0].grid

    def coords_matrix(self, k: int | None = None) -> np.ndarray:
        """p x k matrix whose columns are the first k eigenvectors' coordinates."""
        k = len(self.eigenvectors) if k is None else k
        if k == 0:
            return np.zeros((len(self.grid), 0))
        return np.column_stack([v.coords for v in self.eigenvectors[:k]])

    def reconstruct(self) -> LinearOperator:
        v = self.coords_matrix()
        return LinearOperator(self.grid, (v * self.eigenvalues) @ v.T)


def inner_product(f: GridFunction, g: GridFunction) -> float:
    """Quadrature inner product sum_i w_i f(u_i) g(u_i)."""
    f.grid.require_compatible(g.grid)
    return float(np.dot(f.coords, g.coords))


def tensor(x: GridFunction, y: GridFunction) -> LinearOperator:
    """The rank-one operator z -> <x, z> y."""
    x.grid.require_compatible(y.grid)
    return LinearOperator(x.grid, np.outer(y.coords, x.coords))


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip eigenvector signs so the largest-magnitude coordinate is positive."""
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def eigendecompose(a: LinearOperator) -> EigenSystem:
    """Full spectrum of a self-adjoint operator, eigenvalues descending.

    The coefficient matrix is symmetrized internally when its asymmetry is
    below ``TOL_SYMMETRY`` relative to its magnitude; larger asymmetry raises
    :class:`NotSelfAdjoint`.
    """
    scale = max(1.0, float(np.max(np.abs(a.coeffs), initial=0.0)))
    if a.asymmetry() > TOL_SYMMETRY * scale:
        raise NotSelfAdjoint(
            f"operator asymmetry {a.asymmetry():.3e} exceeds tolerance "
            f"{TOL_SYMMETRY * scale:.3e}"
        )
    sym = (a.coeffs + a.coeffs.T) / 2.0
    eigvals, eigvecs = np.linalg.eigh(sym)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    eigvecs = _fix_signs(eigvecs[:, order])
    funcs = tuple(
        GridFunction.from_coords(a.grid, eigvecs[:, j]) for j in range(eigvecs.shape[1])
    )
    return EigenSystem(eigvals, funcs)


def regularized_inverse(a: LinearOperator, m: int) -> LinearOperator:
    """Partial inverse on the span of the top-m eigenvectors.

    Returns ``sum_{j<=m} a_j^{-1} u_j (x) u_j`` for the descending spectrum
    ``{a_j, u_j}`` of the self-adjoint positive semidefinite operator `a`.
    With ``m = 0`` the result is the zero operator; with ``m = rank(a)`` it is
    the Moore-Penrose inverse.

    Raises
    ------
    RankDeficient
        If the m-th eigenvalue does not exceed ``TOL_RANK`` times the largest.
    """
    if m < 0:
        raise ValueError("m must be a nonnegative integer")
    if m == 0:
        return LinearOperator.zero(a.grid)
    if m > len(a.grid):
        raise ValueError("m cannot exceed the grid dimension")
    es = eigendecompose(a)
    top = es.eigenvalues[0]
    tol = TOL_RANK * max(top, 0.0)
    if es.eigenvalues[m - 1] <= tol:
        raise RankDeficient(
            f"eigenvalue {m} is {es.eigenvalues[m - 1]:.3e}, not above the rank "
            f"tolerance {tol:.3e}"
        )
    v = es.coords_matrix(m)
    inv_vals = 1.0 / es.eigenvalues[:m]
    return LinearOperator(a.grid, (v * inv_vals) @ v.T)


def orthonormalize_coords(coords: np.ndarray, tol: float = TOL_ORTHONORMAL) -> np.ndarray:
    """Validate near-orthonormality of the columns and return an exact basis.

    `coords` is p x k. Raises :class:`NotOrthonormal` when the Gram matrix
    deviates from the identity by more than `tol`; otherwise the columns are
    re-orthonormalized with a QR factorization (stable, span-preserving).
    """
    if coords.shape[1] == 0:
        return coords
    gram = coords.T @ coords
    dev = float(np.max(np.abs(gram - np.eye(coords.shape[1]))))
    if dev > tol:
        raise NotOrthonormal(
            f"supplied functions deviate from orthonormality by {dev:.3e} "
            f"(tolerance {tol:.3e})"
        )
    q, _ = np.linalg.qr(coords)
    return q


def projection_from(
    vs: Sequence[GridFunction] | Iterable[GridFunction], grid: Grid | None = None
) -> LinearOperator:
    """Orthogonal projection onto the span of the given orthonormal functions.

    An empty family yields the zero operator (the projection onto the trivial
    subspace); in that case `grid` must be supplied.
    """
    vs = list(vs)
    if not vs:
        if grid is None:
            raise ValueError("grid is required to build the zero projection")
        return LinearOperator.zero(grid)
    g = vs[0].grid
    for v in vs[1:]:
        g.require_compatible(v.grid)
    if grid is not None:
        g.require_compatible(grid)
    q = orthonormalize_coords(np.column_stack([v.coords for v in vs]))
    return LinearOperator(g, q @ q.T)
