"""Population-mean estimators under measurement error.

Point estimators, first-order bias/MSE with a measurement-error split,
optimum constants, and Monte Carlo / numerical-search oracles that check them.
"""

__version__ = "0.1.0"

from .moments import (  # noqa: E402
    DerivedMoments,
    ParameterError,
    PopulationParams,
    derive_moments,
    read_params,
    write_params,
)
from .estimators import (  # noqa: E402
    EstimatorDomainError,
    EstimatorId,
    ExpProductEstimator,
    ExpRatioEstimator,
    FamilyEstimator,
    RatioEstimator,
    RatioProductEstimator,
    RegressionTypeEstimator,
    Sample,
    SampleMean,
)
from .simulate import SimulationConfig, SimulationResult, run_simulation  # noqa: E402
from .theory import MseBreakdown, OptimumConstants  # noqa: E402

__all__ = [
    "DerivedMoments",
    "EstimatorDomainError",
    "EstimatorId",
    "ExpProductEstimator",
    "ExpRatioEstimator",
    "FamilyEstimator",
    "MseBreakdown",
    "OptimumConstants",
    "ParameterError",
    "PopulationParams",
    "RatioEstimator",
    "RatioProductEstimator",
    "RegressionTypeEstimator",
    "Sample",
    "SampleMean",
    "SimulationConfig",
    "SimulationResult",
    "derive_moments",
    "read_params",
    "run_simulation",
    "write_params",
]
