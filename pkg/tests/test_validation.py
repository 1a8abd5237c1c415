"""Tests for validation and exceptions.

Covers:
- Custom exception hierarchy
- Pydantic training, recipe and grid models
- TOML run configuration loading
"""

from pathlib import Path

import pytest

from src.exceptions import (
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
from src.random_features import FeatureScheme
from src.sandwich import SandwichStructure
from src.validation import (
    GridSpec,
    Recipe,
    RunConfig,
    TrainConfig,
    load_run_config,
    validate_train_config,
)

CONFIG_DIR = Path(__file__).parent.parent / "configs"


def _toml(tmp_path, text):
    path = tmp_path / "run.toml"
    path.write_text(text)
    return path


# =============================================================================
# Exception Hierarchy Tests
# =============================================================================

class TestExceptionHierarchy:
    """Test custom exception classes."""

    def test_base_error(self):
        """Test base RFRBoostError formatting."""
        error = RFRBoostError("Test error", component="sandwich", details={"key": "value"})
        assert "[sandwich]" in str(error)
        assert error.component == "sandwich"
        assert error.details == {"key": "value"}

    def test_to_dict(self):
        """Test exception serialization."""
        error = InvalidInput("Bad shape", component="losses", details={"foo": "bar"})
        result = error.to_dict()
        assert result["error_type"] == "InvalidInput"
        assert result["message"] == "Bad shape"
        assert result["component"] == "losses"
        assert result["details"]["foo"] == "bar"

    def test_data_error_with_source(self):
        """Test DataError carries its source."""
        error = DataError("No rows", source="train.csv", details={"rows": 0})
        assert error.source == "train.csv"
        assert error.details["source"] == "train.csv"
        assert error.details["rows"] == 0

    def test_ingest_error_location(self):
        """Test IngestError appends line and column to the message."""
        error = IngestError("Missing value", source="a.csv", line=4, column="x2")
        assert "line 4" in str(error)
        assert "column 'x2'" in str(error)
        assert isinstance(error, DataError)

    def test_schema_mismatch(self):
        """Test SchemaMismatch keeps both layouts."""
        error = SchemaMismatch("Feature columns differ", expected="3 columns", found="2 columns")
        assert error.expected == "3 columns"
        assert error.found == "2 columns"
        assert "expected 3 columns, found 2 columns" in str(error)

    def test_numerical_family(self):
        """Test solver failures share the NumericalError base."""
        for cls in (SingularSystem, DegenerateProblem, DegeneratePairs, ZeroGradient):
            assert issubclass(cls, NumericalError)

    def test_exception_catching_hierarchy(self):
        """Test that child exceptions are caught by parent handlers."""
        exceptions_to_test = [
            InvalidInput("test"),
            ConfigurationError("test"),
            SingularSystem("test"),
            DegeneratePairs("test"),
            DataError("test"),
            IngestError("test"),
            SchemaMismatch("test"),
        ]
        for exc in exceptions_to_test:
            try:
                raise exc
            except RFRBoostError:
                pass
            except Exception:
                pytest.fail(f"{type(exc).__name__} not caught by RFRBoostError handler")


# =============================================================================
# Pydantic Validation Tests
# =============================================================================

class TestTrainConfigValidation:
    """Test TrainConfig Pydantic model."""

    def test_defaults(self):
        """Test documented defaults."""
        cfg = TrainConfig()
        assert cfg.n_layers == 3
        assert cfg.feature_dim == 512
        assert cfg.l2_linpred == 1e-4
        assert cfg.l2_ghat == 1e-4
        assert cfg.boost_lr == 1.0
        assert cfg.structure is SandwichStructure.DENSE
        assert cfg.feature_scheme is FeatureScheme.SWIM

    def test_bounds(self):
        """Test numeric bounds."""
        TrainConfig(n_layers=0, l2_linpred=0.0, l2_ghat=0.0)
        with pytest.raises(ValueError):
            TrainConfig(n_layers=-1)
        with pytest.raises(ValueError):
            TrainConfig(boost_lr=0.0)
        with pytest.raises(ValueError):
            TrainConfig(boost_lr=1.5)
        with pytest.raises(ValueError):
            TrainConfig(l2_ghat=-1e-3)

    def test_square_structures_need_matching_width(self):
        """Test scalar/diagonal maps require feature_dim == hidden_dim."""
        TrainConfig(structure="scalar", feature_dim=8, hidden_dim=8)
        with pytest.raises(ValueError) as exc_info:
            TrainConfig(structure="diagonal", feature_dim=8, hidden_dim=4)
        assert "feature_dim == hidden_dim" in str(exc_info.value)

    def test_square_structures_need_projection(self):
        """Test scalar maps reject an identity Phi_0."""
        with pytest.raises(ValueError):
            TrainConfig(structure="scalar", phi0="identity")

    def test_swim_scale_positive(self):
        """Test SWIM sampling rejects a zero scale but IID allows it."""
        TrainConfig(feature_scheme="iid", feature_scale=0.0)
        with pytest.raises(ValueError):
            TrainConfig(feature_scheme="swim", feature_scale=0.0)

    def test_unknown_key(self):
        """Test typos are rejected."""
        with pytest.raises(ValueError):
            TrainConfig(n_layer=3)

    def test_validate_train_config(self):
        """Test the helper wraps errors in ConfigurationError."""
        assert validate_train_config(algorithm="rfnn").algorithm == "rfnn"
        with pytest.raises(ConfigurationError):
            validate_train_config(feature_dim=0)


class TestRecipe:
    """Test Recipe overrides."""

    def test_with_overrides(self):
        """Test overrides return a validated copy."""
        base = Recipe(algorithm="gradient", n_layers=3)
        other = base.with_overrides(n_layers=6, l2_linpred=1e-2)
        assert (other.n_layers, other.l2_linpred) == (6, 1e-2)
        assert base.n_layers == 3

    def test_invalid_override(self):
        """Test an invalid override raises ConfigurationError naming the field."""
        with pytest.raises(ConfigurationError) as exc_info:
            Recipe().with_overrides(n_layers=-2)
        assert any("n_layers" in e for e in exc_info.value.details["errors"])

    def test_unknown_algorithm(self):
        """Test algorithms outside the supported set."""
        with pytest.raises(ValueError):
            Recipe(algorithm="xgboost")


class TestGridSpec:
    """Test GridSpec validation."""

    def test_points_in_declaration_order(self):
        """Test the product enumerates the last axis fastest."""
        grid = GridSpec(axes={"n_layers": [1, 3], "l2_linpred": [1e-2, 1e-4]})
        assert grid.size == 4
        assert grid.points() == [
            {"n_layers": 1, "l2_linpred": 1e-2},
            {"n_layers": 1, "l2_linpred": 1e-4},
            {"n_layers": 3, "l2_linpred": 1e-2},
            {"n_layers": 3, "l2_linpred": 1e-4},
        ]

    @pytest.mark.parametrize("axes", [
        {},
        {"n_layers": []},
        {"depth": [1, 2]},
        {"algorithm": ["ridge"]},
    ])
    def test_invalid_axes(self, axes):
        """Test empty grids, empty axes, unknown fields and algorithm axes."""
        with pytest.raises(ValueError):
            GridSpec(axes=axes)


# =============================================================================
# Run configuration files
# =============================================================================

class TestLoadRunConfig:
    """Test TOML loading."""

    @pytest.mark.parametrize("name", [
        "sine_train.toml",
        "sine_evaluate.toml",
        "friedman_cv.toml",
        "ripple_gridcv.toml",
        "rings_train.toml",
        "pointcloud.toml",
    ])
    def test_bundled_configs(self, name):
        """Test every bundled config validates."""
        cfg = load_run_config(CONFIG_DIR / name)
        assert isinstance(cfg, RunConfig)

    def test_grid_table_wrapped(self, tmp_path):
        """Test a [grid] table lists axes directly."""
        path = _toml(tmp_path, """
task = "gridcv"
[data]
train_path = "x.csv"
[grid]
n_layers = [1, 2]
""")
        cfg = load_run_config(path)
        assert cfg.grid.axes == {"n_layers": [1, 2]}

    def test_overrides(self, tmp_path):
        """Test task, seed and output overrides win over the file."""
        path = _toml(tmp_path, 'task = "cv"\nseed = 1\n[data]\ntrain_path = "x.csv"\n')
        cfg = load_run_config(path, task="train", seed=9, out_dir=tmp_path / "out")
        assert (cfg.task, cfg.seed) == ("train", 9)
        assert cfg.output.dir == tmp_path / "out"

    def test_no_file(self):
        """Test a config-less pointcloud run uses defaults."""
        cfg = load_run_config(None, task="pointcloud")
        assert cfg.pointcloud.n == 10_000
        assert cfg.pointcloud.hidden_dim == 2

    def test_missing_file(self, tmp_path):
        """Test an unreadable file raises ConfigurationError."""
        with pytest.raises(ConfigurationError, match="Cannot read"):
            load_run_config(tmp_path / "absent.toml")

    def test_bad_toml(self, tmp_path):
        """Test a syntax error raises ConfigurationError."""
        with pytest.raises(ConfigurationError, match="not valid TOML"):
            load_run_config(_toml(tmp_path, "task = \n"))

    def test_unknown_key(self, tmp_path):
        """Test a typo in a section is reported."""
        path = _toml(tmp_path, 'task = "train"\n[data]\ntrain_path = "x.csv"\n[model]\nn_layer = 3\n')
        with pytest.raises(ConfigurationError) as exc_info:
            load_run_config(path)
        assert any("n_layer" in e for e in exc_info.value.details["errors"])

    @pytest.mark.parametrize("text", [
        'task = "train"\n',
        'task = "evaluate"\n[data]\ntest_path = "x.csv"\n',
        'task = "gridcv"\n[data]\ntrain_path = "x.csv"\n',
        'task = "train"\n[data]\ntrain_path = "x.csv"\ntask = "classification"\n[model]\nalgorithm = "greedy"\n',
        'task = "train"\n[data]\ntrain_path = "x.csv"\n[model]\nalgorithm = "logistic"\n',
    ])
    def test_task_requirements(self, tmp_path, text):
        """Test each task's required inputs and algorithm/task compatibility."""
        with pytest.raises(ConfigurationError):
            load_run_config(_toml(tmp_path, text))

    def test_pointcloud_rings_vs_classes(self, tmp_path):
        """Test the point cloud needs at least as many rings as classes."""
        path = _toml(tmp_path, 'task = "pointcloud"\n[pointcloud]\nrings = 2\nclasses = 3\n')
        with pytest.raises(ConfigurationError):
            load_run_config(path)

    @pytest.mark.parametrize("text", [
        'task = "gridcv"\n[data]\ntrain_path = "x.csv"\n[grid]\nl2_linpred = [1e-2, -1.0]\n',
        'task = "gridcv"\n[data]\ntrain_path = "x.csv"\n'
        '[model]\nalgorithm = "greedy"\nstructure = "scalar"\nhidden_dim = 8\nfeature_dim = 8\n'
        '[grid]\nfeature_dim = [8, 16]\n',
    ])
    def test_invalid_grid_point(self, tmp_path, text):
        """Test a grid value that breaks the recipe fails at load time."""
        with pytest.raises(ConfigurationError) as exc_info:
            load_run_config(_toml(tmp_path, text))
        assert any("grid point" in e for e in exc_info.value.details["errors"])
