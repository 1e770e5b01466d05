"""Exception types raised across the package.

Every error raised by library code derives from :class:`FmfpcaError` so that
callers (and the CLI) can catch the package's failures with a single except
clause while still discriminating on the specific condition.
"""


class FmfpcaError(Exception):
    """Base class for all errors raised by this package."""


class GridMismatch(FmfpcaError):
    """Two functional objects do not share the same grid."""


class NonFinite(FmfpcaError):
    """An array contains NaN or infinite entries."""


class NotSelfAdjoint(FmfpcaError):
    """An operator required to be self-adjoint is asymmetric beyond tolerance."""


class RankDeficient(FmfpcaError):
    """A regularized inverse was requested past the numerical rank."""


class NotOrthonormal(FmfpcaError):
    """A supplied set of functions is not orthonormal within tolerance."""


class TooShort(FmfpcaError):
    """The time series is too short for the requested operation."""


class PhiTooLarge(FmfpcaError):
    """The requested number of trend directions exceeds what is available."""


class NonPositiveBandwidth(FmfpcaError):
    """The kernel bandwidth must be strictly positive."""


class SingularLrv(FmfpcaError):
    """The long-run variance matrix inside a test statistic is singular."""


class KOutOfRange(FmfpcaError):
    """The projection dimension K violates phi0 < K <= grid dimension."""


class MissingCriticalValues(FmfpcaError):
    """No critical values are available for the requested test configuration."""


class DimMismatch(FmfpcaError):
    """A hypothesized subspace has an incompatible dimension."""


class IllConditioned(FmfpcaError):
    """A full operator inverse was requested for a nearly singular operator."""


class GramSingular(FmfpcaError):
    """A simulated Gram matrix is numerically singular; the draw is unusable."""


class OutOfDomain(FmfpcaError):
    """Function values fall outside the transform's domain."""

    def __init__(self, message, offending_points=None):
        super().__init__(message)
        self.offending_points = offending_points


class NonPositiveDensity(FmfpcaError):
    """Density values fall at or below the positivity floor."""


class NotCentered(FmfpcaError):
    """A function expected to have zero quadrature mean is not centered."""


class RaggedRows(FmfpcaError):
    """A wide-format data file has rows of unequal length."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class NonMonotoneGrid(FmfpcaError):
    """Grid abscissae are not strictly increasing."""


class EmptyFile(FmfpcaError):
    """A data file contains no usable rows."""


class ConfigError(FmfpcaError):
    """Invalid or inconsistent run configuration."""
