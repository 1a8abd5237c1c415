"""
Cross-Validation and Metrics
============================

k-fold evaluation of model recipes with train-only preprocessing.

Every fold derives its own training seed from (seed, fold), so scores do not
depend on whether folds run serially or on a thread pool.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any, Literal, Protocol

import numpy as np
import pandas as pd
from sklearn.model_selection import KFold

from src.boosting import Prediction, fit_recipe
from src.exceptions import InvalidInput
from src.harness.data import Dataset, Preprocessor, preprocess
from src.logging_config import Timer, get_logger
from src.utils import ParallelRunner, derive_seed
from src.validation import Recipe

logger = get_logger(__name__)

Metric = Literal["rmse", "accuracy"]


class Predictor(Protocol):
    def predict(self, X) -> Prediction: ...


Trainer = Recipe | Callable[[Dataset, int], Predictor]


# =============================================================================
# Metrics
# =============================================================================

def rmse(predictions, truth) -> float:
    """sqrt of the mean squared error over all entries."""
    p = np.asarray(predictions, dtype=np.float64)
    t = np.asarray(truth, dtype=np.float64)
    if p.size != t.size or p.shape[0] != t.shape[0]:
        raise InvalidInput("Predictions and truth differ in length", component="metrics",
                           details={"predictions": p.shape, "truth": t.shape})
    diff = p.reshape(t.shape) - t
    return float(np.sqrt(np.mean(diff * diff)))


def accuracy(predictions, truth) -> float:
    """Fraction of exact label matches."""
    p = np.asarray(predictions).reshape(-1)
    t = np.asarray(truth).reshape(-1)
    if p.shape != t.shape:
        raise InvalidInput("Predictions and truth differ in length", component="metrics",
                           details={"predictions": p.shape, "truth": t.shape})
    return float(np.mean(p == t))


def metrics(predictions, truth, kind: Metric) -> float:
    if kind == "rmse":
        return rmse(predictions, truth)
    if kind == "accuracy":
        return accuracy(predictions, truth)
    raise InvalidInput(f"Unknown metric '{kind}'", component="metrics")


def default_metric(data: Dataset) -> Metric:
    return "accuracy" if data.is_classification else "rmse"


def higher_is_better(metric: Metric) -> bool:
    return metric == "accuracy"


def score(prediction: Prediction, data: Dataset, metric: Metric | None = None) -> float:
    """Score a prediction against a dataset's targets."""
    metric = metric or default_metric(data)
    if metric == "accuracy":
        if prediction.labels is None:
            raise InvalidInput("Accuracy needs label predictions", component="metrics")
        return accuracy(prediction.labels, data.targets)
    if prediction.values is None:
        raise InvalidInput("RMSE needs value predictions", component="metrics")
    return rmse(prediction.values, data.targets)


# =============================================================================
# Cross-validation
# =============================================================================

@dataclass(frozen=True)
class CvPlan:
    """Fold id for every row; folds partition 0..n-1 with sizes differing by at most 1."""

    k: int
    folds: np.ndarray
    seed: int

    def split(self, fold: int) -> tuple[np.ndarray, np.ndarray]:
        test = np.flatnonzero(self.folds == fold)
        train = np.flatnonzero(self.folds != fold)
        return train, test


def make_cv_plan(n: int, k: int, seed: int) -> CvPlan:
    """Shuffled k-fold assignment."""
    if k < 2 or n < k:
        raise InvalidInput("Need k >= 2 and n >= k", component="evaluation", details={"n": n, "k": k})
    folds = np.empty(n, dtype=np.int64)
    splitter = KFold(n_splits=k, shuffle=True, random_state=int(seed) % (2**32))
    for fold, (_, test) in enumerate(splitter.split(np.zeros((n, 1)))):
        folds[test] = fold
    return CvPlan(k=k, folds=folds, seed=seed)


@dataclass(frozen=True)
class CvResult:
    metric: Metric
    scores: tuple[float, ...]
    seconds: tuple[float, ...] = field(compare=False)
    plan: CvPlan = field(compare=False)

    @property
    def mean(self) -> float:
        return float(np.mean(self.scores))

    @property
    def sd(self) -> float:
        """Sample standard deviation (ddof = 1)."""
        return float(np.std(self.scores, ddof=1)) if len(self.scores) > 1 else 0.0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "fold": np.arange(len(self.scores)),
            self.metric: self.scores,
            "seconds": self.seconds,
        })

    def to_dict(self, include_timing: bool = True) -> dict[str, Any]:
        out: dict[str, Any] = {
            "metric": self.metric,
            "scores": list(self.scores),
            "mean": self.mean,
            "sd": self.sd,
            "k": self.plan.k,
        }
        if include_timing:
            out["seconds"] = list(self.seconds)
        return out


def fit_and_score(trainer: Trainer, train: Dataset, test: Dataset, metric: Metric, seed: int,
                  standardize_target: bool = False) -> float:
    """Preprocess on ``train`` only, train, and score on ``test``."""
    prep, train_t, (test_t,) = preprocess(train, [test], standardize_target=standardize_target)
    model = fit_recipe(trainer, train_t, seed=seed) if isinstance(trainer, Recipe) else trainer(train_t, seed)
    prediction = model.predict(test_t.features)
    if prediction.values is not None:
        prediction = Prediction(values=prep.inverse_target(prediction.values))
    return score(prediction, test, metric)


def kfold_evaluate(
    data: Dataset,
    k: int,
    trainer: Trainer,
    metric: Metric | None = None,
    seed: int = 0,
    model_seed: int | None = None,
    runner: ParallelRunner | None = None,
    standardize_target: bool = False,
) -> CvResult:
    """
    k-fold cross-validation of a recipe or a trainer callable.

    Parameters
    ----------
    data : Dataset
        Raw (unpreprocessed) dataset
    k : int
        Number of folds
    trainer : Recipe or callable
        A Recipe, or ``trainer(train_dataset, seed)`` returning an object with
        ``predict(X) -> Prediction``
    metric : {"rmse", "accuracy"}, optional
        Defaults to accuracy for classification, RMSE otherwise
    seed : int
        Seeds the fold assignment
    model_seed : int, optional
        Base of the per-fold training seeds; defaults to ``seed``
    runner : ParallelRunner, optional
        Fold executor; serial when omitted

    Returns
    -------
    CvResult
        Per-fold scores in fold order, mean and sample sd
    """
    metric = metric or default_metric(data)
    plan = make_cv_plan(data.n, k, seed)
    base = seed if model_seed is None else model_seed
    runner = runner or ParallelRunner(parallel=False)

    def run_fold(fold: int) -> tuple[float, float]:
        train_idx, test_idx = plan.split(fold)
        with Timer(f"fold {fold}", logger) as timer:
            value = fit_and_score(trainer, data.subset(train_idx), data.subset(test_idx), metric,
                                  derive_seed(base, fold), standardize_target)
        logger.info("Fold scored", fold=fold, metric=metric, score=round(value, 6))
        return value, timer.elapsed

    results = runner.map(run_fold, range(k), desc="folds")
    return CvResult(
        metric=metric,
        scores=tuple(r[0] for r in results),
        seconds=tuple(r[1] for r in results),
        plan=plan,
    )


def fit_full(recipe: Recipe, data: Dataset, seed: int,
             standardize_target: bool = False) -> tuple[Preprocessor, Any]:
    """Preprocess all of ``data`` and train one model on it."""
    prep, train_t, _ = preprocess(data, standardize_target=standardize_target)
    model = fit_recipe(recipe, train_t, seed=seed, metadata={"preprocessor": prep.to_dict()})
    return prep, model
