"""Evaluation harness: datasets, generators, cross-validation and grid search."""

from .data import (
    ClassificationTarget,
    ColumnMeta,
    CsvSchema,
    Dataset,
    Preprocessor,
    RegressionTarget,
    from_arrays,
    load_csv,
    observation_cap,
    preprocess,
)
from .evaluation import CvPlan, CvResult, accuracy, kfold_evaluate, make_cv_plan, metrics, rmse, score
from .generators import make_blobs, make_concentric_circles, make_sine_toy
from .grid import GridResult, NestedResult, grid_search, nested_evaluate

__all__ = [
    "ClassificationTarget",
    "ColumnMeta",
    "CsvSchema",
    "CvPlan",
    "CvResult",
    "Dataset",
    "GridResult",
    "NestedResult",
    "Preprocessor",
    "RegressionTarget",
    "accuracy",
    "from_arrays",
    "grid_search",
    "kfold_evaluate",
    "load_csv",
    "make_blobs",
    "make_concentric_circles",
    "make_cv_plan",
    "make_sine_toy",
    "metrics",
    "nested_evaluate",
    "observation_cap",
    "preprocess",
    "rmse",
    "score",
]
