"""Pydantic validation models for RFRBoost.

Provides type-safe validation for:
- Training hyperparameters (TrainConfig) and model recipes
- Grid-search specifications
- TOML run configuration files consumed by the CLI

All models use Pydantic v2 syntax and reject unknown keys, so a typo in a
config file fails before any compute starts.
"""

from __future__ import annotations

import itertools
import sys
from pathlib import Path
from typing import Annotated, Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from src.config import config
from src.exceptions import ConfigurationError
from src.random_features import FeatureScheme
from src.sandwich import SandwichStructure

Algorithm = Literal["greedy", "gradient", "rfnn", "ridge", "logistic"]
Task = Literal["train", "evaluate", "cv", "gridcv", "pointcloud"]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


# =============================================================================
# Training hyperparameters
# =============================================================================

class SwimSettings(_Strict):
    """SWIM sampling knobs; the scale itself is TrainConfig.feature_scale (c2)."""
    eps: Annotated[float, Field(gt=0.0, description="Density denominator guard")] = config.SWIM_EPS


class TrainConfig(_Strict):
    """Validated boosting hyperparameters.

    Example:
        cfg = TrainConfig(n_layers=6, structure="dense", feature_dim=256)
    """
    n_layers: Annotated[int, Field(ge=0, description="Number of residual blocks T")] = config.DEFAULT_N_LAYERS
    boost_lr: Annotated[float, Field(gt=0.0, le=1.0, description="Learning rate eta")] = config.DEFAULT_BOOST_LR
    l2_linpred: Annotated[float, Field(ge=0.0, description="Ridge weight of the top predictor")] = config.DEFAULT_L2_LINPRED
    l2_ghat: Annotated[float, Field(ge=0.0, description="Ridge weight of the block fit")] = config.DEFAULT_L2_GHAT
    feature_dim: Annotated[int, Field(ge=1, description="Random features per block p")] = config.DEFAULT_FEATURE_DIM
    hidden_dim: Annotated[int | None, Field(ge=1, description="Representation width D")] = None
    phi0: Literal["auto", "identity", "projection"] = "auto"
    structure: SandwichStructure = SandwichStructure.DENSE
    feature_scheme: FeatureScheme = FeatureScheme.SWIM
    feature_scale: Annotated[float, Field(ge=0.0, description="IID std or SWIM c2")] = config.DEFAULT_FEATURE_SCALE
    swim: SwimSettings = SwimSettings()
    use_feature_norm: bool = False
    fit_intercept: bool = True
    seed: Annotated[int, Field(ge=0)] = 0

    @model_validator(mode="after")
    def validate_shapes(self) -> TrainConfig:
        """Scalar and diagonal maps need p == D; SWIM needs a positive scale."""
        if self.structure is not SandwichStructure.DENSE:
            if self.hidden_dim is not None and self.hidden_dim != self.feature_dim:
                raise ValueError(
                    f"{self.structure.value} structure requires feature_dim == hidden_dim "
                    f"(got feature_dim={self.feature_dim}, hidden_dim={self.hidden_dim})"
                )
            if self.phi0 == "identity":
                raise ValueError(f"{self.structure.value} structure needs a projection phi0")
        if self.feature_scheme is FeatureScheme.SWIM and self.feature_scale <= 0:
            raise ValueError("SWIM features need feature_scale > 0")
        return self


class Recipe(TrainConfig):
    """A training algorithm plus its hyperparameters.

    Example:
        recipe = Recipe(algorithm="rfnn", feature_dim=512, l2_linpred=1e-3)
    """
    algorithm: Algorithm = "gradient"
    binary_loss: Literal["cce", "bce"] = "cce"

    def with_overrides(self, **updates: Any) -> Recipe:
        """Validated copy with some fields replaced.

        Raises:
            ConfigurationError: If the merged fields are invalid
        """
        try:
            return Recipe.model_validate({**self.model_dump(), **updates})
        except ValidationError as e:
            raise ConfigurationError(
                f"Invalid override {updates}: {'; '.join(_format_errors(e))}",
                component="validation",
                details={"overrides": updates, "errors": _format_errors(e)},
            ) from e


# =============================================================================
# Grid search
# =============================================================================

class GridSpec(_Strict):
    """Named axes over Recipe fields, enumerated in declaration order.

    Example:
        grid = GridSpec(axes={"n_layers": [1, 3, 6], "l2_linpred": [1e-2, 1e-4]})
        grid.size  # 6
    """
    axes: dict[str, list[Any]]

    @field_validator("axes")
    @classmethod
    def validate_axes(cls, v: dict[str, list[Any]]) -> dict[str, list[Any]]:
        if not v:
            raise ValueError("grid needs at least one axis")
        known = set(Recipe.model_fields)
        for name, values in v.items():
            if name not in known:
                raise ValueError(f"unknown grid axis '{name}'")
            if name == "algorithm":
                raise ValueError("the algorithm cannot be a grid axis")
            if not values:
                raise ValueError(f"grid axis '{name}' is empty")
        return v

    @property
    def size(self) -> int:
        size = 1
        for values in self.axes.values():
            size *= len(values)
        return size

    def points(self) -> list[dict[str, Any]]:
        names = list(self.axes)
        return [dict(zip(names, combo, strict=True)) for combo in itertools.product(*self.axes.values())]


# =============================================================================
# Run configuration file
# =============================================================================

class DataSection(_Strict):
    train_path: Path | None = None
    test_path: Path | None = None
    model_path: Path | None = None
    target: str = "target"
    task: Literal["regression", "classification"] = "regression"
    categorical: list[str] = Field(default_factory=list)
    observation_cap: Annotated[int | None, Field(ge=2)] = None
    standardize_target: bool = False


class CvSection(_Strict):
    folds: Annotated[int, Field(ge=2)] = config.DEFAULT_FOLDS
    inner_folds: Annotated[int, Field(ge=2)] = config.DEFAULT_INNER_FOLDS
    parallel: bool = False
    max_workers: Annotated[int, Field(ge=1)] = config.PARALLEL_MAX_WORKERS


class PointCloudSection(_Strict):
    n: Annotated[int, Field(ge=20)] = config.POINTCLOUD_N
    rings: Annotated[int, Field(ge=2)] = config.POINTCLOUD_RINGS
    classes: Annotated[int, Field(ge=2)] = config.POINTCLOUD_CLASSES
    noise_sd: Annotated[float, Field(ge=0.0)] = config.POINTCLOUD_NOISE_SD
    hidden_dim: Annotated[int, Field(ge=1)] = config.POINTCLOUD_HIDDEN_DIM
    n_layers: Annotated[int, Field(ge=0)] = config.POINTCLOUD_N_LAYERS
    feature_dim: Annotated[int, Field(ge=1)] = config.DEFAULT_FEATURE_DIM
    feature_scale: Annotated[float, Field(gt=0.0)] = config.DEFAULT_FEATURE_SCALE
    l2_ghat: Annotated[float, Field(ge=0.0)] = config.DEFAULT_L2_GHAT
    boost_lr: Annotated[float, Field(gt=0.0, le=1.0)] = config.DEFAULT_BOOST_LR
    use_feature_norm: bool = True
    repeats: Annotated[int, Field(ge=1)] = 1
    inner_folds: Annotated[int, Field(ge=2)] = config.DEFAULT_INNER_FOLDS
    l2_grid: list[float] = Field(default_factory=lambda: list(config.POINTCLOUD_L2_CLS_GRID), min_length=1)
    logistic_l2_grid: list[float] = Field(
        default_factory=lambda: list(config.POINTCLOUD_L2_LOGISTIC_GRID), min_length=1
    )

    @model_validator(mode="after")
    def validate_rings(self) -> PointCloudSection:
        if self.rings < self.classes:
            raise ValueError(f"rings ({self.rings}) must be >= classes ({self.classes})")
        return self


class OutputSection(_Strict):
    dir: Path = Path("runs")
    model_file: str = "model.json"
    report_file: str = "report.json"


class RunConfig(_Strict):
    """Validated CLI run configuration (one TOML file).

    Example:
        task = "cv"
        seed = 7

        [data]
        train_path = "data/sine_toy.csv"

        [model]
        algorithm = "greedy"
        n_layers = 5
    """
    task: Task
    seed: Annotated[int, Field(ge=0)] = 0
    data: DataSection = DataSection()
    model: Recipe = Recipe()
    cv: CvSection = CvSection()
    grid: GridSpec | None = None
    pointcloud: PointCloudSection = PointCloudSection()
    output: OutputSection = OutputSection()

    @field_validator("grid", mode="before")
    @classmethod
    def wrap_axes(cls, v: Any) -> Any:
        """The [grid] table lists axes directly."""
        if isinstance(v, dict) and "axes" not in v:
            return {"axes": v}
        return v

    @model_validator(mode="after")
    def validate_task_inputs(self) -> RunConfig:
        if self.task in ("train", "cv", "gridcv") and self.data.train_path is None:
            raise ValueError(f"task '{self.task}' needs data.train_path")
        if self.task == "evaluate":
            if self.data.model_path is None:
                raise ValueError("task 'evaluate' needs data.model_path")
            if self.data.test_path is None and self.data.train_path is None:
                raise ValueError("task 'evaluate' needs data.test_path or data.train_path")
        if self.task == "gridcv" and self.grid is None:
            raise ValueError("task 'gridcv' needs a [grid] section")
        regression_only = self.model.algorithm in ("greedy", "ridge")
        if regression_only and self.data.task == "classification" and self.task != "pointcloud":
            raise ValueError(f"algorithm '{self.model.algorithm}' is regression-only")
        if self.model.algorithm == "logistic" and self.data.task == "regression" and self.task != "pointcloud":
            raise ValueError("algorithm 'logistic' is classification-only")
        return self

    @model_validator(mode="after")
    def validate_grid_points(self) -> RunConfig:
        """Every grid point applied to [model] must be a valid recipe."""
        if self.grid is None:
            return self
        for point in self.grid.points():
            try:
                self.model.with_overrides(**point)
            except ConfigurationError as e:
                raise ValueError(f"grid point {point}: {'; '.join(e.details['errors'])}") from e
        return self


# =============================================================================
# Utility Functions
# =============================================================================

def _format_errors(e: ValidationError) -> list[str]:
    return [f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}" for err in e.errors()]


def validate_train_config(**params: Any) -> Recipe:
    """Validate hyperparameters and create a Recipe.

    Raises:
        ConfigurationError: If parameters are invalid
    """
    try:
        return Recipe(**params)
    except ValidationError as e:
        raise ConfigurationError(
            f"Invalid training configuration: {'; '.join(_format_errors(e))}",
            component="validation",
            details={"errors": _format_errors(e)},
        ) from e


def load_run_config(path: str | Path | None, task: str | None = None, seed: int | None = None,
                    out_dir: str | Path | None = None) -> RunConfig:
    """Read and validate a TOML run configuration.

    Args:
        path: TOML file; None starts from an empty configuration
        task: Overrides the file's task when given (the CLI subcommand)
        seed: Overrides the file's seed when given
        out_dir: Overrides [output].dir when given

    Raises:
        ConfigurationError: If the file is unreadable, not TOML, or invalid
    """
    raw: dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        try:
            with open(path, "rb") as f:
                raw = tomllib.load(f)
        except OSError as e:
            raise ConfigurationError(f"Cannot read config file {path}: {e}", component="validation") from e
        except tomllib.TOMLDecodeError as e:
            raise ConfigurationError(f"Config file {path} is not valid TOML: {e}", component="validation") from e

    if task is not None:
        raw["task"] = task
    if seed is not None:
        raw["seed"] = seed
    if out_dir is not None:
        raw.setdefault("output", {})["dir"] = str(out_dir)

    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigurationError(
            f"Invalid config {path}: {'; '.join(_format_errors(e))}",
            component="validation",
            details={"errors": _format_errors(e)},
        ) from e
