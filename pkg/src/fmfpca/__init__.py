"""Fully modified functional PCA for cointegrated functional time series.

Estimation of the trend (attractor) and cointegrating subspaces of a
functional time series, KPSS-type tests for the trend-space dimension and
for subspace hypotheses, simulation of the limiting null distributions, and
a Monte Carlo harness for size/power experiments.
"""

from .cointtest import (
    SequentialResult,
    TestOutcome,
    attractor_in_subspace_test,
    dimension_test,
    kpss_core,
    sequential_dimension,
    subspace_in_attractor_test,
)
from .critsim import CriticalValueTable, critical_values, simulate_limit_draw
from .dgp import DgpConfig, DgpPath, generate_path, rejection_experiment
from .errors import FmfpcaError
from .fpca import (
    DeterministicMode,
    FpcaResult,
    FunctionalSeries,
    ordinary_fpca,
    residualize,
    sample_covariance,
)
from .hilbert import (
    EigenSystem,
    Grid,
    GridFunction,
    LinearOperator,
    eigendecompose,
    inner_product,
    projection_from,
    regularized_inverse,
    tensor,
)
from .lrcov import (
    KernelSpec,
    LrcovPair,
    default_bandwidth,
    kernel_weight,
    operator_lrcov,
    vector_lrv,
)
from .modified import (
    ModifiedFpcaResult,
    build_z,
    harris_fpca,
    modified_fpca,
    modified_series,
    upsilon,
)
from .transforms import DensityFunction, clr_transform, inverse_clr, logit_curve

__version__ = "0.1.0"

__all__ = [
    "CriticalValueTable",
    "DensityFunction",
    "DeterministicMode",
    "DgpConfig",
    "DgpPath",
    "EigenSystem",
    "FmfpcaError",
    "FpcaResult",
    "FunctionalSeries",
    "Grid",
    "GridFunction",
    "KernelSpec",
    "LinearOperator",
    "LrcovPair",
    "ModifiedFpcaResult",
    "SequentialResult",
    "TestOutcome",
    "attractor_in_subspace_test",
    "build_z",
    "clr_transform",
    "critical_values",
    "default_bandwidth",
    "dimension_test",
    "eigendecompose",
    "generate_path",
    "harris_fpca",
    "inner_product",
    "inverse_clr",
    "kernel_weight",
    "kpss_core",
    "logit_curve",
    "modified_fpca",
    "modified_series",
    "operator_lrcov",
    "ordinary_fpca",
    "projection_from",
    "regularized_inverse",
    "rejection_experiment",
    "residualize",
    "sample_covariance",
    "sequential_dimension",
    "simulate_limit_draw",
    "subspace_in_attractor_test",
    "tensor",
    "upsilon",
    "vector_lrv",
]
