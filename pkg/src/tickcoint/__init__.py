"""Transaction-level bivariate price models, cointegration estimators and a Monte Carlo limit-law lab."""

from .errors import (
    ConfigError,
    ConsistencyError,
    DegenerateInputError,
    ExperimentError,
    InputError,
    ParameterError,
    ResourceError,
    TickCointError,
    ValidationError,
)
from .estimators import TaperConfig, ctaper_theta, gph_memory, ols_theta, spurious_delta, taper_theta, tapered_dft
from .market import AssetConfig, MarketConfig, StepPath, average_over, sample_at, simulate

__version__ = "0.1.0"

__all__ = [
    "AssetConfig",
    "ConfigError",
    "ConsistencyError",
    "DegenerateInputError",
    "ExperimentError",
    "InputError",
    "MarketConfig",
    "ParameterError",
    "ResourceError",
    "StepPath",
    "TaperConfig",
    "TickCointError",
    "ValidationError",
    "average_over",
    "ctaper_theta",
    "gph_memory",
    "ols_theta",
    "sample_at",
    "simulate",
    "spurious_delta",
    "taper_theta",
    "tapered_dft",
]
