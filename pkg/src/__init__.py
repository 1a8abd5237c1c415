"""RFRBoost - Core modules."""

# Load environment variables first (must be before other imports)
from . import env_loader  # noqa: F401

from .boosting import (
    BoostedModel,
    Prediction,
    fit_recipe,
    train_gradient,
    train_greedy_mse,
    train_logistic,
    train_rfnn,
    train_ridge,
)
from .config import config
from .exceptions import (
    ConfigurationError,
    DataError,
    DegeneratePairs,
    DegenerateProblem,
    IngestError,
    InvalidInput,
    NumericalError,
    RFRBoostError,
    SchemaMismatch,
    SingularSystem,
    ZeroGradient,
)
from .logging_config import Timer, get_logger, log_performance
from .losses import LossKind
from .random_features import FeatureScheme
from .sandwich import SandwichStructure
from .serialization import load_model, save_model
from .validation import GridSpec, Recipe, RunConfig, TrainConfig, load_run_config, validate_train_config

__all__ = [
    # Config
    "config",
    # Training
    "BoostedModel",
    "Prediction",
    "LossKind",
    "FeatureScheme",
    "SandwichStructure",
    "fit_recipe",
    "train_greedy_mse",
    "train_gradient",
    "train_rfnn",
    "train_ridge",
    "train_logistic",
    # Persistence
    "save_model",
    "load_model",
    # Exceptions
    "RFRBoostError",
    "InvalidInput",
    "ConfigurationError",
    "NumericalError",
    "SingularSystem",
    "DegenerateProblem",
    "DegeneratePairs",
    "ZeroGradient",
    "DataError",
    "IngestError",
    "SchemaMismatch",
    # Logging
    "get_logger",
    "log_performance",
    "Timer",
    # Validation
    "TrainConfig",
    "Recipe",
    "GridSpec",
    "RunConfig",
    "validate_train_config",
    "load_run_config",
]
