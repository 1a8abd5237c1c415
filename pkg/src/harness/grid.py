"""
Grid Search
===========

Exhaustive hyperparameter selection by inner k-fold CV, and nested CV around it.

Ties on the mean metric go to the smaller n_layers, then the larger
l2_linpred, then the earlier grid point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
import pandas as pd

from src.harness.data import Dataset
from src.harness.evaluation import (
    CvResult,
    Metric,
    default_metric,
    fit_and_score,
    higher_is_better,
    kfold_evaluate,
    make_cv_plan,
)
from src.logging_config import get_logger
from src.utils import ParallelRunner, derive_seed
from src.validation import GridSpec, Recipe

logger = get_logger(__name__)

# keeps grid-point training streams apart from fold streams
_POINT_STREAM = 7919


@dataclass(frozen=True)
class GridResult:
    """Selected point, its recipe, and one table row per grid point."""

    best_index: int
    best_point: dict[str, Any]
    best_recipe: Recipe
    table: pd.DataFrame = field(compare=False)
    metric: Metric = "rmse"

    @property
    def best_score(self) -> float:
        return float(self.table.loc[self.best_index, "mean"])


def _selection_key(metric: Metric, mean: float, recipe: Recipe, index: int) -> tuple:
    sign = -1.0 if higher_is_better(metric) else 1.0
    return (sign * mean, recipe.n_layers, -recipe.l2_linpred, index)


def grid_search(
    data: Dataset,
    grid: GridSpec,
    recipe: Recipe,
    inner_k: int,
    metric: Metric | None = None,
    seed: int = 0,
    runner: ParallelRunner | None = None,
    standardize_target: bool = False,
) -> GridResult:
    """
    Evaluate every grid point by k-fold CV on ``data`` and pick the best.

    All points share one fold assignment; each point trains with its own
    derived seed stream.
    """
    metric = metric or default_metric(data)
    points = grid.points()
    recipes = [recipe.with_overrides(**point) for point in points]
    runner = runner or ParallelRunner(parallel=False)
    logger.info("Grid search started", points=grid.size, inner_k=inner_k, metric=metric)

    def run_point(index: int) -> CvResult:
        return kfold_evaluate(
            data, inner_k, recipes[index], metric=metric, seed=seed,
            model_seed=derive_seed(seed, _POINT_STREAM, index),
            standardize_target=standardize_target,
        )

    results = runner.map(run_point, range(len(points)), desc="grid")

    rows = []
    for index, (point, result) in enumerate(zip(points, results, strict=True)):
        rows.append({**point, "mean": result.mean, "sd": result.sd,
                     **{f"fold_{i}": s for i, s in enumerate(result.scores)}})
    table = pd.DataFrame(rows)

    best = min(range(len(points)),
               key=lambda i: _selection_key(metric, results[i].mean, recipes[i], i))
    table["selected"] = np.arange(len(points)) == best
    logger.info("Grid search finished", best=points[best], score=round(results[best].mean, 6))
    return GridResult(best_index=best, best_point=points[best], best_recipe=recipes[best],
                      table=table, metric=metric)


@dataclass(frozen=True)
class NestedResult:
    metric: Metric
    scores: tuple[float, ...]
    selected: tuple[dict[str, Any], ...]

    @property
    def mean(self) -> float:
        return float(np.mean(self.scores))

    @property
    def sd(self) -> float:
        return float(np.std(self.scores, ddof=1)) if len(self.scores) > 1 else 0.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "metric": self.metric,
            "scores": list(self.scores),
            "mean": self.mean,
            "sd": self.sd,
            "selected": list(self.selected),
        }


def nested_evaluate(
    data: Dataset,
    grid: GridSpec,
    recipe: Recipe,
    k: int,
    inner_k: int,
    metric: Metric | None = None,
    seed: int = 0,
    runner: ParallelRunner | None = None,
    standardize_target: bool = False,
) -> NestedResult:
    """Outer k-fold CV; each outer training split is tuned by grid_search, refit and scored."""
    metric = metric or default_metric(data)
    plan = make_cv_plan(data.n, k, seed)
    runner = runner or ParallelRunner(parallel=False)

    def run_fold(fold: int) -> tuple[float, dict[str, Any]]:
        train_idx, test_idx = plan.split(fold)
        train = data.subset(train_idx)
        fold_seed = derive_seed(seed, fold)
        search = grid_search(train, grid, recipe, inner_k, metric, fold_seed,
                             standardize_target=standardize_target)
        value = fit_and_score(search.best_recipe, train, data.subset(test_idx), metric,
                              derive_seed(fold_seed, 1), standardize_target)
        logger.info("Outer fold scored", fold=fold, metric=metric, score=round(value, 6),
                    selected=search.best_point)
        return value, search.best_point

    results = runner.map(run_fold, range(k), desc="outer folds")
    return NestedResult(
        metric=metric,
        scores=tuple(r[0] for r in results),
        selected=tuple(r[1] for r in results),
    )
