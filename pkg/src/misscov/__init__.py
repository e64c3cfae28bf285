"""Spectral analysis of pairwise-complete covariance estimators under
missing-at-random observations."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    ContractError,
    ConvergenceError,
    DensityCurve,
    DiagonalModel,
    DomainError,
    FixedPointSolution,
    InternalError,
    MaskedSample,
    MisscovError,
    ModelMatrices,
    SingularityError,
    SpectralMeasure,
    build_model_matrices,
)

__all__ = [
    "__version__",
    "ContractError",
    "ConvergenceError",
    "DensityCurve",
    "DiagonalModel",
    "DomainError",
    "FixedPointSolution",
    "InternalError",
    "MaskedSample",
    "MisscovError",
    "ModelMatrices",
    "SingularityError",
    "SpectralMeasure",
    "build_model_matrices",
]
