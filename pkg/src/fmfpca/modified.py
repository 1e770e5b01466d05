"""The fully modified FPCA pipeline.

The preliminary eigenprojections leave two nuisance effects in the limit of
the estimated trend subspace: correlation between the trend and stationary
innovations, and a one-sided serial-covariance bias. Both are removed here.
The endogeneity correction subtracts from each observation a regression of
its trend-direction increment on the stationary part (via long-run
covariance blocks), and the bias correction subtracts an additive operator
adjustment from the resulting sample covariance before eigendecomposing.

Increments are only observable from the second observation on, so the
derived series (`build_z`, `modified_series`, and everything downstream)
run over t = 2..T with T-1 as the normalizer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IllConditioned, PhiTooLarge, RankDeficient, TooShort
from .fpca import (
    DeterministicMode,
    FpcaResult,
    FunctionalSeries,
    ordinary_fpca,
    residualize,
    sample_covariance,
)
from .hilbert import (
    TOL_RANK,
    EigenSystem,
    LinearOperator,
    eigendecompose,
)
from .lrcov import KernelSpec, LrcovPair, operator_lrcov

__all__ = [
    "ModifiedFpcaResult",
    "build_z",
    "modified_series",
    "upsilon",
    "modified_fpca",
    "harris_fpca",
]


@dataclass(frozen=True)
class ModifiedFpcaResult:
    """Corrected projections, the corrected spectrum, and the intermediates."""

    proj_N: LinearOperator
    proj_S: LinearOperator
    spectrum: EigenSystem
    modified_series: FunctionalSeries
    upsilon: LinearOperator
    lrcov: LrcovPair
    phi: int


def build_z(x: FunctionalSeries, fp: FpcaResult) -> FunctionalSeries:
    """The stationary proxy series: trend-part increments plus stationary part.

    Z_t = Pn (X_t - X_{t-1}) + Ps X_t for t = 2..T, where Pn and Ps are the
    preliminary projections. Output has T-1 observations.
    """
    x.grid.require_compatible(fp.proj_N.grid)
    if len(x) < 2:
        raise TooShort("need at least 2 observations to difference")
    c = x.coords
    dc = np.diff(c, axis=0)
    pn = fp.proj_N.coeffs
    ps = fp.proj_S.coeffs
    # row convention: (A v)' = v' A' and both projections are symmetric
    z = dc @ pn + c[1:] @ ps
    return FunctionalSeries.from_coords(x.grid, z)


def _nn_regularized_inverse(fp: FpcaResult, omega: LinearOperator) -> np.ndarray:
    """Coefficients of (Pn omega Pn) restricted-inverted on the rank-phi range.

    Equivalent to the phi-regularized inverse of the NN block, computed as a
    phi x phi symmetric inverse in the basis of the preliminary trend
    eigenfunctions and lifted back. Zero matrix when phi = 0.
    """
    phi = fp.phi
    p = len(fp.proj_N.grid)
    if phi == 0:
        return np.zeros((p, p))
    v = fp.spectrum.coords_matrix(phi)
    small = v.T @ omega.coeffs @ v
    small = (small + small.T) / 2.0
    eigvals = np.linalg.eigvalsh(small)
    if eigvals[0] <= TOL_RANK * max(eigvals[-1], 0.0):
        raise RankDeficient(
            "the trend-block long-run covariance is numerically rank deficient; "
            "cannot form its regularized inverse"
        )
    return v @ np.linalg.inv(small) @ v.T


def modified_series(
    x: FunctionalSeries, fp: FpcaResult, lr: LrcovPair
) -> FunctionalSeries:
    """Endogeneity-corrected observations for t = 2..T.

    Subtracts from X_t the component of the trend-part increment that is
    correlated with the stationary part:

        X_corr_t = X_t - Omega_SN (Omega_NN restricted-inverse) Pn (X_t - X_{t-1}).

    With phi = 0 the correction is the zero operator and X is returned
    unchanged (apart from dropping the first observation).
    """
    x.grid.require_compatible(fp.proj_N.grid)
    if len(x) < 2:
        raise TooShort("need at least 2 observations to difference")
    c = x.coords
    dc = np.diff(c, axis=0)
    nn_inv = _nn_regularized_inverse(fp, lr.omega)
    pn = fp.proj_N.coeffs
    ps = fp.proj_S.coeffs
    omega_sn = ps @ lr.omega.coeffs @ pn
    corr = omega_sn @ nn_inv @ pn
    return FunctionalSeries.from_coords(x.grid, c[1:] - dc @ corr.T)


def upsilon(fp: FpcaResult, lr: LrcovPair) -> LinearOperator:
    """The serial-covariance bias operator.

    Gamma_NS - Gamma_NN (Omega_NN restricted-inverse) Omega_NS. Maps the
    stationary range into the trend range: Pn ups Ps = ups.
    """
    pn = fp.proj_N.coeffs
    ps = fp.proj_S.coeffs
    om = lr.omega.coeffs
    ga = lr.gamma.coeffs
    nn_inv = _nn_regularized_inverse(fp, lr.omega)
    coeffs = pn @ ga @ ps - (pn @ ga @ pn) @ nn_inv @ (pn @ om @ ps)
    return LinearOperator(fp.proj_N.grid, coeffs)


def _projections_from_spectrum(spectrum: EigenSystem, phi: int):
    grid = spectrum.grid
    w = spectrum.coords_matrix(phi)
    proj_n = LinearOperator(grid, w @ w.T)
    proj_s = LinearOperator.identity(grid) - proj_n
    return proj_n, proj_s


def modified_fpca(
    x: FunctionalSeries,
    phi: int,
    spec: KernelSpec,
    h: float,
    mode: DeterministicMode = DeterministicMode.NONE,
) -> ModifiedFpcaResult:
    """Run the full corrected eigenproblem pipeline.

    Stages: residualize -> preliminary FPCA at `phi` -> stationary proxy
    series -> long-run covariance -> endogeneity-corrected series -> sample
    covariance -> subtract the bias operator and its adjoint -> symmetric
    eigendecomposition -> projections from the top-phi eigenfunctions.

    The corrected operator is self-adjoint analytically; it is symmetrized
    before the eigensolve to kill roundoff asymmetry.
    """
    if len(x) < 4:
        raise TooShort("the corrected eigenproblem needs at least 4 observations")
    if phi > len(x.grid):
        raise PhiTooLarge(f"phi={phi} exceeds the grid dimension {len(x.grid)}")
    u = residualize(x, mode)
    fp = ordinary_fpca(u, phi)
    z = build_z(u, fp)
    lr = operator_lrcov(z, spec, h)
    xm = modified_series(u, fp, lr)
    ups = upsilon(fp, lr)
    corrected = sample_covariance(xm) - ups - ups.adjoint()
    spectrum = eigendecompose(corrected.symmetrized())
    proj_n, proj_s = _projections_from_spectrum(spectrum, phi)
    return ModifiedFpcaResult(
        proj_N=proj_n,
        proj_S=proj_s,
        spectrum=spectrum,
        modified_series=xm,
        upsilon=ups,
        lrcov=lr,
        phi=phi,
    )


def harris_fpca(
    x: FunctionalSeries,
    phi: int,
    spec: KernelSpec,
    h: float,
    mode: DeterministicMode = DeterministicMode.NONE,
) -> ModifiedFpcaResult:
    """Finite-dimensional variant with a second, full-inverse correction.

    Subtracts an additional term involving the inverse of the sample
    covariance of the stationary proxy series, after which no bias-operator
    adjustment is needed:

        X_dd_t = X_corr_t - Gamma_SN Czz^{-1} Z_t,    Czz = cov(Z).

    Valid only when Czz is numerically invertible; when the data do not span
    the discretized space (the typical situation on fine grids) this raises
    :class:`IllConditioned`, which is the method's intrinsic limitation.
    The returned `upsilon` is the zero operator since no additive spectrum
    correction is applied.
    """
    if phi < 1:
        raise ValueError("this variant requires phi >= 1")
    if len(x) < 4:
        raise TooShort("the corrected eigenproblem needs at least 4 observations")
    if phi > len(x.grid):
        raise PhiTooLarge(f"phi={phi} exceeds the grid dimension {len(x.grid)}")
    u = residualize(x, mode)
    fp = ordinary_fpca(u, phi)
    z = build_z(u, fp)
    lr = operator_lrcov(z, spec, h)

    czz = sample_covariance(z).coeffs
    eigvals = np.linalg.eigvalsh(czz)
    if eigvals[0] <= TOL_RANK * max(eigvals[-1], 0.0):
        raise IllConditioned(
            "the stationary-proxy covariance is numerically singular "
            f"(min/max eigenvalue ratio {eigvals[0] / max(eigvals[-1], 1e-300):.3e}); "
            "use modified_fpca instead"
        )

    c = u.coords
    dc = np.diff(c, axis=0)
    pn = fp.proj_N.coeffs
    ps = fp.proj_S.coeffs
    nn_inv = _nn_regularized_inverse(fp, lr.omega)
    omega_corr = (ps @ lr.omega.coeffs @ pn) @ nn_inv @ pn
    gamma_sn = ps @ lr.gamma.coeffs @ pn
    zc = z.coords
    xdd = c[1:] - dc @ omega_corr.T - zc @ np.linalg.solve(czz, gamma_sn.T)
    xm = FunctionalSeries.from_coords(x.grid, xdd)

    spectrum = eigendecompose(sample_covariance(xm).symmetrized())
    proj_n, proj_s = _projections_from_spectrum(spectrum, phi)
    return ModifiedFpcaResult(
        proj_N=proj_n,
        proj_S=proj_s,
        spectrum=spectrum,
        modified_series=xm,
        upsilon=LinearOperator.zero(x.grid),
        lrcov=lr,
        phi=phi,
    )
