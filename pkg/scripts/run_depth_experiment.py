#!/usr/bin/env python3
"""
Run Depth Experiment
====================

Compare gradient RFRBoost (depth tuned over {1, 3, 6}) with a single
random-feature layer (RFNN, ridge tuned) and plain ridge regression on the
bundled regression CSVs, using nested cross-validation for every model.

Usage:
    python -m scripts.run_depth_experiment [--seed 0] [--out runs/depth]
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

import pandas as pd

from src.harness import CsvSchema, load_csv, nested_evaluate
from src.logging_config import Timer, get_logger
from src.validation import GridSpec, Recipe

logger = get_logger(__name__)

DATASETS = ("data/sine_toy.csv", "data/friedman1.csv", "data/ripple2d.csv")

MODELS: dict[str, tuple[Recipe, GridSpec]] = {
    "rfrboost": (
        Recipe(algorithm="gradient", feature_dim=256, l2_linpred=1e-4, l2_ghat=1e-4),
        GridSpec(axes={"n_layers": [1, 3, 6]}),
    ),
    "rfnn": (
        Recipe(algorithm="rfnn", feature_dim=256),
        GridSpec(axes={"l2_linpred": [1e-2, 1e-4, 1e-6]}),
    ),
    "ridge": (
        Recipe(algorithm="ridge"),
        GridSpec(axes={"l2_linpred": [1e-1, 1e-3, 1e-5]}),
    ),
}


def run_depth_experiment(
    paths: tuple[str, ...] = DATASETS,
    seed: int = 0,
    folds: int = 5,
    inner_folds: int = 3,
) -> pd.DataFrame:
    """One row per (dataset, model) with the nested-CV mean and sd of the RMSE."""
    rows = []
    for path in paths:
        data = load_csv(path, CsvSchema(target="target"))
        for name, (recipe, grid) in MODELS.items():
            with Timer(f"{Path(path).stem}/{name}", logger) as timer:
                result = nested_evaluate(data, grid, recipe, folds, inner_folds, "rmse", seed=seed,
                                         standardize_target=True)
            rows.append({
                "dataset": Path(path).stem,
                "model": name,
                "rmse_mean": result.mean,
                "rmse_sd": result.sd,
                "seconds": timer.elapsed,
            })
    return pd.DataFrame(rows)


def main():
    parser = argparse.ArgumentParser(description="RFRBoost vs RFNN vs ridge on the bundled regression data")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="runs/depth")
    args = parser.parse_args()

    table = run_depth_experiment(seed=args.seed)
    print(table.to_string(index=False))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    table.to_csv(out / "depth_experiment.csv", index=False)
    wide = table.pivot(index="dataset", columns="model", values="rmse_mean")
    with open(out / "depth_experiment.json", "w") as f:
        json.dump(wide.to_dict(orient="index"), f, indent=2, sort_keys=True)
    logger.info("Depth experiment written", out=str(out))


if __name__ == "__main__":
    main()
