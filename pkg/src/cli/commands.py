"""CLI command handlers for RFRBoost.

Each function handles one subcommand: it takes a validated RunConfig, runs
the library, writes its artifacts under the output directory, displays the
result and returns the report dictionary written to ``report.json``.
"""

from __future__ import annotations

import json
from collections.abc import Callable
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from src.boosting import BoostedModel, Prediction
from src.cli.display import (
    display_cv,
    display_evaluation,
    display_grid,
    display_nested,
    display_pointcloud,
    display_train_report,
    print_header,
    print_msg,
)
from src.exceptions import ConfigurationError, DataError, InvalidInput, NumericalError, SchemaMismatch
from src.harness import (
    CsvSchema,
    Dataset,
    Preprocessor,
    grid_search,
    kfold_evaluate,
    load_csv,
    make_concentric_circles,
    nested_evaluate,
    observation_cap,
    score,
)
from src.harness.evaluation import default_metric, fit_full
from src.logging_config import Timer, get_logger
from src.random_features import FeatureScheme
from src.serialization import load_model, save_model
from src.utils import ParallelRunner, derive_seed
from src.validation import GridSpec, Recipe, RunConfig

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


def exit_code_for(error: Exception) -> int:
    """Map a library error to the process exit code."""
    if isinstance(error, ConfigurationError):
        return EXIT_CONFIG
    if isinstance(error, DataError):
        return EXIT_DATA
    if isinstance(error, (NumericalError, InvalidInput)):
        return EXIT_NUMERICAL
    raise error


# =============================================================================
# Shared helpers
# =============================================================================

def _output_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_report(report: dict[str, Any], path: Path) -> Path:
    path.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
    return path


def _load_training_data(cfg: RunConfig) -> Dataset:
    data = load_csv(cfg.data.train_path, _schema(cfg))
    return observation_cap(data, cfg.data.observation_cap, cfg.seed)


def _schema(cfg: RunConfig) -> CsvSchema:
    return CsvSchema(target=cfg.data.target, task=cfg.data.task, categorical=tuple(cfg.data.categorical))


def _runner(cfg: RunConfig) -> ParallelRunner:
    return ParallelRunner(max_workers=cfg.cv.max_workers, parallel=cfg.cv.parallel)


def _predict_raw(model: BoostedModel, prep: Preprocessor, data: Dataset) -> Prediction:
    """Predict on unpreprocessed data, returning regression values on the original scale."""
    features = prep.transform(data).features
    if features.shape[1] != model.input_dim:
        raise SchemaMismatch("Feature count differs from the model", expected=str(model.input_dim),
                             found=str(features.shape[1]), source=data.source)
    prediction = model.predict(features)
    if prediction.values is not None:
        return Prediction(values=prep.inverse_target(prediction.values))
    return prediction


# =============================================================================
# train / evaluate
# =============================================================================

def handle_train_command(cfg: RunConfig) -> dict[str, Any]:
    """Fit the configured recipe on the training CSV and save the model."""
    print_header("RFRBoost: Train")
    data = _load_training_data(cfg)
    out = _output_dir(cfg)

    with Timer("train", logger) as timer:
        prep, model = fit_full(cfg.model, data, cfg.seed, cfg.data.standardize_target)
    model_path = save_model(model, out / cfg.output.model_file)

    metric = default_metric(data)
    report = {
        "task": "train",
        "algorithm": model.algorithm,
        "loss": model.loss.name.value,
        "n": data.n,
        "input_dim": model.input_dim,
        "width": model.width,
        "n_blocks": model.n_blocks,
        "risk_trace": list(model.risk_trace),
        "metric": metric,
        "train_score": score(_predict_raw(model, prep, data), data, metric),
        "model_path": str(model_path),
        "seed": cfg.seed,
        "timing": {"seconds": timer.elapsed},
    }
    write_report(report, out / cfg.output.report_file)
    display_train_report(report)
    print_msg(f"Model saved to {model_path}", "success")
    return report


def handle_evaluate_command(cfg: RunConfig) -> dict[str, Any]:
    """Score a saved model on a CSV with the training-time preprocessing."""
    print_header("RFRBoost: Evaluate")
    model = load_model(cfg.data.model_path)
    if "preprocessor" not in model.metadata:
        raise DataError("Model file carries no preprocessing state", source=str(cfg.data.model_path),
                        component="cli")
    prep = Preprocessor.from_dict(model.metadata["preprocessor"])
    path = cfg.data.test_path or cfg.data.train_path
    data = load_csv(path, _schema(cfg), class_names=prep.class_names)

    metric = default_metric(data)
    report = {
        "task": "evaluate",
        "metric": metric,
        "score": score(_predict_raw(model, prep, data), data, metric),
        "n": data.n,
        "data_path": str(path),
        "model_path": str(cfg.data.model_path),
    }
    write_report(report, _output_dir(cfg) / cfg.output.report_file)
    display_evaluation(report)
    return report


# =============================================================================
# cv / gridcv
# =============================================================================

def handle_cv_command(cfg: RunConfig) -> dict[str, Any]:
    """k-fold CV of the configured recipe; scores go to cv_scores.csv."""
    print_header("RFRBoost: Cross-Validation")
    data = _load_training_data(cfg)
    out = _output_dir(cfg)

    result = kfold_evaluate(data, cfg.cv.folds, cfg.model, seed=cfg.seed, runner=_runner(cfg),
                            standardize_target=cfg.data.standardize_target)
    result.to_frame().drop(columns="seconds").to_csv(out / "cv_scores.csv", index=False)

    report = {"task": "cv", "algorithm": cfg.model.algorithm, "seed": cfg.seed,
              **result.to_dict(include_timing=False), "timing": {"seconds": list(result.seconds)}}
    write_report(report, out / cfg.output.report_file)
    display_cv(report)
    return report


def handle_gridcv_command(cfg: RunConfig) -> dict[str, Any]:
    """Nested CV around a grid search, plus the grid table on the full training data."""
    print_header("RFRBoost: Grid Search")
    data = _load_training_data(cfg)
    out = _output_dir(cfg)
    grid = cfg.grid
    if grid is None:
        raise ConfigurationError("task 'gridcv' needs a [grid] section", component="cli")

    search = grid_search(data, grid, cfg.model, cfg.cv.inner_folds, seed=cfg.seed, runner=_runner(cfg),
                         standardize_target=cfg.data.standardize_target)
    search.table.to_csv(out / "grid_table.csv", index=False)
    display_grid(search.table, search.metric)

    nested = nested_evaluate(data, grid, cfg.model, cfg.cv.folds, cfg.cv.inner_folds, seed=cfg.seed,
                             runner=_runner(cfg), standardize_target=cfg.data.standardize_target)
    report = {
        "task": "gridcv",
        "algorithm": cfg.model.algorithm,
        "seed": cfg.seed,
        "grid_size": grid.size,
        "selected": search.best_point,
        "selected_score": search.best_score,
        "nested": nested.to_dict(),
    }
    write_report(report, out / cfg.output.report_file)
    display_nested(report["nested"])
    print_msg(f"Selected on all data: {search.best_point}", "success")
    return report


# =============================================================================
# pointcloud
# =============================================================================

def _pointcloud_recipes(cfg: RunConfig) -> dict[str, tuple[Recipe, GridSpec]]:
    pc = cfg.pointcloud
    boosted = Recipe(
        algorithm="gradient",
        n_layers=pc.n_layers,
        hidden_dim=pc.hidden_dim,
        feature_dim=pc.feature_dim,
        feature_scheme=FeatureScheme.SWIM,
        feature_scale=pc.feature_scale,
        l2_ghat=pc.l2_ghat,
        boost_lr=pc.boost_lr,
        use_feature_norm=pc.use_feature_norm,
    )
    rfnn = Recipe(
        algorithm="rfnn",
        feature_dim=pc.feature_dim,
        feature_scheme=FeatureScheme.SWIM,
        feature_scale=pc.feature_scale,
        use_feature_norm=pc.use_feature_norm,
    )
    return {
        "rfrboost": (boosted, GridSpec(axes={"l2_linpred": list(pc.l2_grid)})),
        "rfnn": (rfnn, GridSpec(axes={"l2_linpred": list(pc.l2_grid)})),
        "logistic": (Recipe(algorithm="logistic"), GridSpec(axes={"l2_linpred": list(pc.logistic_l2_grid)})),
    }


def _write_representations(model: BoostedModel, features: np.ndarray, labels: np.ndarray, out: Path) -> None:
    """layer_{t}.csv holds Phi_t of every test point; test_labels.csv their classes."""
    out.mkdir(parents=True, exist_ok=True)
    for t, phi in enumerate(model.representations(features)):
        columns = [f"phi_{j + 1}" for j in range(phi.shape[1])]
        pd.DataFrame(phi, columns=columns).to_csv(out / f"layer_{t}.csv", index=False)
    pd.DataFrame({"label": labels}).to_csv(out / "test_labels.csv", index=False)


def handle_pointcloud_command(cfg: RunConfig) -> dict[str, Any]:
    """Concentric circles: tuned RFRBoost against RFNN and logistic regression."""
    print_header("RFRBoost: Concentric Circles")
    pc = cfg.pointcloud
    out = _output_dir(cfg)
    recipes = _pointcloud_recipes(cfg)
    results: dict[str, dict[str, list]] = {name: {"accuracy": [], "selected_l2": []} for name in recipes}

    for repeat in range(pc.repeats):
        seed = derive_seed(cfg.seed, repeat)
        data = make_concentric_circles(pc.n, pc.rings, pc.classes, pc.noise_sd, seed=seed)
        n_train = data.n // 2
        train = data.subset(np.arange(n_train))
        test = data.subset(np.arange(n_train, data.n))

        for name, (recipe, grid) in recipes.items():
            search = grid_search(train, grid, recipe, pc.inner_folds, "accuracy", seed=seed,
                                 runner=_runner(cfg))
            prep, model = fit_full(search.best_recipe, train, derive_seed(seed, 1))
            accuracy = score(_predict_raw(model, prep, test), test, "accuracy")
            results[name]["accuracy"].append(accuracy)
            results[name]["selected_l2"].append(search.best_recipe.l2_linpred)
            logger.info("Point cloud model scored", repeat=repeat, model=name, accuracy=round(accuracy, 4))

            if repeat == 0 and name == "rfrboost":
                _write_representations(model, prep.transform(test).features, test.targets,
                                       out / "representations")

    models = {}
    for name, result in results.items():
        acc = np.asarray(result["accuracy"])
        models[name] = {
            **result,
            "mean": float(acc.mean()),
            "sd": float(acc.std(ddof=1)) if acc.size > 1 else 0.0,
        }
    report = {
        "task": "pointcloud",
        "seed": cfg.seed,
        "repeats": pc.repeats,
        "n": pc.n,
        "models": models,
        "representations_dir": str(out / "representations"),
    }
    write_report(report, out / cfg.output.report_file)
    display_pointcloud(report)
    return report


COMMANDS: dict[str, Callable[[RunConfig], dict[str, Any]]] = {
    "train": handle_train_command,
    "evaluate": handle_evaluate_command,
    "cv": handle_cv_command,
    "gridcv": handle_gridcv_command,
    "pointcloud": handle_pointcloud_command,
}


def run_command(cfg: RunConfig) -> int:
    """Run ``cfg.task`` and translate library errors into exit codes."""
    try:
        COMMANDS[cfg.task](cfg)
    except (ConfigurationError, DataError, NumericalError, InvalidInput) as e:
        logger.error("Command failed", task=cfg.task, error=e.to_dict())
        print_msg(str(e), "error")
        return exit_code_for(e)
    return EXIT_OK
