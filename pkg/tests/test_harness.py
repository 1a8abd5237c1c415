"""Tests for CSV ingestion, preprocessing, generators, metrics and cross-validation."""

import math
from pathlib import Path

import numpy as np
import pytest

from src.boosting import Prediction
from src.exceptions import DataError, IngestError, InvalidInput, SchemaMismatch
from src.harness import (
    CsvSchema,
    Preprocessor,
    accuracy,
    from_arrays,
    kfold_evaluate,
    load_csv,
    make_blobs,
    make_concentric_circles,
    make_cv_plan,
    make_sine_toy,
    metrics,
    observation_cap,
    preprocess,
    rmse,
    score,
)
from src.utils import ParallelRunner, derive_seed
from src.validation import Recipe

DATA_DIR = Path(__file__).parent.parent / "data"


def _write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


class _MeanModel:
    def __init__(self, value):
        self.value = value

    def predict(self, X):
        return Prediction(values=np.full((len(X), 1), self.value))


def _mean_trainer(train, seed):
    return _MeanModel(float(train.targets.mean()))


# =============================================================================
# CSV ingestion
# =============================================================================

class TestLoadCsv:
    """Strict CSV reader."""

    def test_bundled_regression(self):
        """The bundled sine file has one feature and 256 rows."""
        data = load_csv(DATA_DIR / "sine_toy.csv")
        assert (data.n, data.n_features) == (256, 1)
        assert not data.is_classification

    def test_bundled_classification(self):
        """String labels are encoded in sorted order."""
        data = load_csv(DATA_DIR / "rings3.csv", CsvSchema(target="label", task="classification"))
        assert data.n_classes == 3
        assert data.target.class_names == ("alpha", "beta", "gamma")
        assert data.targets[0] == 0

    def test_ragged_row(self, tmp_path):
        """A short row is reported with its line number."""
        path = _write(tmp_path, "x,target\n1,2\n3\n")
        with pytest.raises(IngestError) as info:
            load_csv(path)
        assert info.value.line == 3

    def test_missing_value(self, tmp_path):
        """An empty cell names its line and column."""
        path = _write(tmp_path, "x,target\n1,2\n,4\n")
        with pytest.raises(IngestError) as info:
            load_csv(path)
        assert (info.value.line, info.value.column) == (3, "x")

    def test_non_numeric(self, tmp_path):
        """Text in a numeric column raises IngestError."""
        path = _write(tmp_path, "x,target\n1,2\nabc,4\n")
        with pytest.raises(IngestError, match="Non-numeric"):
            load_csv(path)

    def test_non_finite(self, tmp_path):
        """inf and nan are rejected."""
        path = _write(tmp_path, "x,target\n1,inf\n")
        with pytest.raises(IngestError, match="Non-finite"):
            load_csv(path)

    def test_missing_target_column(self, tmp_path):
        """A declared column absent from the header raises IngestError."""
        path = _write(tmp_path, "x,y\n1,2\n")
        with pytest.raises(IngestError, match="not found"):
            load_csv(path)

    def test_header_only(self, tmp_path):
        """A header without rows raises DataError."""
        with pytest.raises(DataError, match="no data rows"):
            load_csv(_write(tmp_path, "x,target\n"))

    def test_empty_file(self, tmp_path):
        """An empty file raises IngestError."""
        with pytest.raises(IngestError, match="empty"):
            load_csv(_write(tmp_path, ""))

    def test_missing_file(self, tmp_path):
        """A missing path raises DataError."""
        with pytest.raises(DataError, match="Cannot open"):
            load_csv(tmp_path / "absent.csv")

    def test_unknown_class_label(self, tmp_path):
        """With known class names a new label is rejected."""
        path = _write(tmp_path, "x,label\n1,a\n2,c\n")
        schema = CsvSchema(target="label", task="classification")
        with pytest.raises(IngestError, match="Unknown class label"):
            load_csv(path, schema, class_names=("a", "b"))

    def test_single_class(self, tmp_path):
        """A classification file needs two or more classes."""
        path = _write(tmp_path, "x,label\n1,a\n2,a\n")
        with pytest.raises(IngestError, match="two classes"):
            load_csv(path, CsvSchema(target="label", task="classification"))

    def test_blank_lines_skipped(self, tmp_path):
        """Blank lines between rows are ignored."""
        data = load_csv(_write(tmp_path, "x,target\n1,2\n\n3,4\n"))
        assert data.n == 2


# =============================================================================
# Preprocessing
# =============================================================================

class TestPreprocessing:
    """Statistics from the training split only."""

    def test_standardizes_with_train_statistics(self):
        """Test features are scaled with the training mean and sd."""
        train = from_arrays([[0.0], [2.0]], [0.0, 1.0])
        test = from_arrays([[4.0]], [0.0])
        _, train_t, (test_t,) = preprocess(train, [test])
        np.testing.assert_allclose(train_t.features[:, 0], [-1.0, 1.0])
        np.testing.assert_allclose(test_t.features[:, 0], [3.0])

    def test_constant_column_kept(self):
        """A constant column is centered but not divided by zero."""
        train = from_arrays([[5.0, 1.0], [5.0, 2.0]], [0.0, 1.0])
        _, train_t, _ = preprocess(train)
        np.testing.assert_array_equal(train_t.features[:, 0], [0.0, 0.0])

    def test_one_hot_and_unseen_levels(self, tmp_path):
        """Categorical columns are one-hot encoded; unseen levels map to all zeros."""
        schema = CsvSchema(categorical=("color",))
        train = load_csv(DATA_DIR / "toy_mixed.csv", schema)
        other = load_csv(_write(tmp_path, "x1,color,x2,target\n0.1,purple,0.2,1.0\n"), schema)
        prep, train_t, (other_t,) = preprocess(train, [other])
        assert prep.output_columns == ("x1", "color=blue", "color=green", "color=red", "x2")
        assert train_t.features[:, 1:4].sum(axis=1).tolist() == [1.0] * train.n
        np.testing.assert_array_equal(other_t.features[0, 1:4], [0.0, 0.0, 0.0])

    def test_column_mismatch(self):
        """Different feature columns raise SchemaMismatch naming both layouts."""
        prep = Preprocessor.fit(from_arrays([[1.0, 2.0]], [0.0], feature_names=["a", "b"]))
        with pytest.raises(SchemaMismatch) as info:
            prep.transform(from_arrays([[1.0]], [0.0], feature_names=["a"]))
        assert info.value.expected == "2 columns (a, b)"
        assert info.value.found == "1 columns (a)"

    def test_target_standardization_inverts(self):
        """inverse_target undoes the target scaling."""
        train = from_arrays([[0.0], [1.0], [2.0]], [10.0, 20.0, 30.0])
        prep, train_t, _ = preprocess(train, standardize_target=True)
        np.testing.assert_allclose(train_t.targets.mean(), 0.0, atol=1e-12)
        np.testing.assert_allclose(prep.inverse_target(train_t.targets), train.targets)

    def test_dict_round_trip(self):
        """to_dict / from_dict reproduce the preprocessor."""
        train = load_csv(DATA_DIR / "toy_mixed.csv", CsvSchema(categorical=("color",)))
        prep = Preprocessor.fit(train, standardize_target=True)
        assert Preprocessor.from_dict(prep.to_dict()) == prep

    def test_categorical_needs_preprocessing(self):
        """Raw datasets with string columns refuse to produce a feature matrix."""
        data = load_csv(DATA_DIR / "toy_mixed.csv", CsvSchema(categorical=("color",)))
        with pytest.raises(InvalidInput):
            _ = data.features


class TestObservationCap:
    """Uniform subsampling."""

    def test_caps_rows(self):
        """At most cap rows are kept, in original order."""
        data = from_arrays(np.arange(100.0), np.arange(100.0))
        capped = observation_cap(data, 10, seed=0)
        assert capped.n == 10
        assert np.all(np.diff(capped.features[:, 0]) > 0)

    def test_deterministic(self):
        """The same seed keeps the same rows."""
        data = from_arrays(np.arange(50.0), np.arange(50.0))
        np.testing.assert_array_equal(observation_cap(data, 5, 3).features, observation_cap(data, 5, 3).features)

    def test_no_cap(self):
        """None or a cap above n returns the dataset unchanged."""
        data = from_arrays(np.arange(5.0), np.arange(5.0))
        assert observation_cap(data, None, 0) is data
        assert observation_cap(data, 10, 0) is data


# =============================================================================
# Generators
# =============================================================================

class TestGenerators:
    """Synthetic datasets."""

    def test_circles_layout(self):
        """Radii are (j + 1) / rings and labels are ring mod classes."""
        data = make_concentric_circles(n=900, rings=9, classes=3, noise_sd=0.0, seed=0)
        radius = np.linalg.norm(data.features, axis=1)
        ring = np.rint(radius * 9).astype(int) - 1
        np.testing.assert_allclose(radius, (ring + 1) / 9, atol=1e-12)
        np.testing.assert_array_equal(data.targets, ring % 3)
        assert np.bincount(ring).tolist() == [100] * 9

    def test_circles_invalid(self):
        """Fewer rings than classes is rejected."""
        with pytest.raises(InvalidInput):
            make_concentric_circles(n=10, rings=2, classes=3)

    def test_sine(self):
        """y = sin(4x) on [-1, 1]."""
        data = make_sine_toy(64, seed=2)
        np.testing.assert_allclose(data.targets[:, 0], np.sin(4.0 * data.features[:, 0]))
        assert np.all(np.abs(data.features) <= 1.0)

    def test_blobs(self):
        """Blobs have the requested shape and classes."""
        data = make_blobs(n=90, seed=0, n_classes=3, n_features=4)
        assert (data.n, data.n_features, data.n_classes) == (90, 4, 3)

    def test_same_seed_same_data(self):
        """Generators are deterministic in their seed."""
        a = make_concentric_circles(n=50, rings=3, classes=3, seed=4)
        b = make_concentric_circles(n=50, rings=3, classes=3, seed=4)
        np.testing.assert_array_equal(a.features, b.features)


# =============================================================================
# Metrics
# =============================================================================

class TestMetrics:
    """RMSE and accuracy."""

    def test_rmse(self):
        """Errors (3, 4) give sqrt(12.5)."""
        assert rmse([[3.0], [0.0]], [[0.0], [4.0]]) == pytest.approx(np.sqrt(12.5))

    def test_accuracy(self):
        """Three of four labels match."""
        assert accuracy([0, 1, 2, 2], [0, 1, 1, 2]) == 0.75

    def test_rmse_matches_reference(self):
        """RMSE agrees with an exactly summed reference on random vectors to 1e-12."""
        rng = np.random.default_rng(21)
        for _ in range(100):
            n = int(rng.integers(1, 200))
            predictions, truth = rng.standard_normal(n) * 10.0, rng.standard_normal(n) * 10.0
            reference = math.sqrt(math.fsum((p - t) ** 2 for p, t in zip(predictions, truth, strict=True)) / n)
            assert rmse(predictions, truth) == pytest.approx(reference, rel=1e-12)

    def test_length_mismatch(self):
        """Different lengths raise InvalidInput."""
        with pytest.raises(InvalidInput):
            rmse([1.0, 2.0], [1.0])
        with pytest.raises(InvalidInput):
            accuracy([0], [0, 1])

    def test_unknown_metric(self):
        """Only rmse and accuracy are known."""
        with pytest.raises(InvalidInput, match="Unknown metric"):
            metrics([1.0], [1.0], "mae")

    def test_score_needs_matching_prediction(self):
        """Accuracy needs labels and RMSE needs values."""
        data = from_arrays([[0.0]], [1.0])
        with pytest.raises(InvalidInput):
            score(Prediction(labels=np.array([0])), data, "rmse")


# =============================================================================
# Cross-validation
# =============================================================================

class TestCvPlan:
    """Shuffled fold assignment."""

    @pytest.mark.parametrize("n,k", [(10, 2), (11, 3), (100, 7), (5, 5)])
    def test_partition(self, n, k):
        """Folds cover every row once and differ in size by at most one."""
        plan = make_cv_plan(n, k, seed=1)
        sizes = np.bincount(plan.folds, minlength=k)
        assert sizes.sum() == n
        assert sizes.max() - sizes.min() <= 1
        train, test = plan.split(0)
        assert sorted(np.concatenate([train, test]).tolist()) == list(range(n))

    def test_deterministic(self):
        """Equal seeds give equal plans."""
        np.testing.assert_array_equal(make_cv_plan(40, 4, 9).folds, make_cv_plan(40, 4, 9).folds)

    def test_invalid(self):
        """k < 2 or n < k raise InvalidInput."""
        with pytest.raises(InvalidInput):
            make_cv_plan(10, 1, 0)
        with pytest.raises(InvalidInput):
            make_cv_plan(3, 4, 0)


class TestKfoldEvaluate:
    """k-fold CV of recipes and trainer callables."""

    def test_mean_predictor(self):
        """A train-mean predictor scores the RMSE of the held-out rows around that mean."""
        data = make_sine_toy(60, seed=3)
        result = kfold_evaluate(data, 3, _mean_trainer, seed=2)
        plan = make_cv_plan(60, 3, 2)
        for fold, value in enumerate(result.scores):
            train, test = plan.split(fold)
            mean = data.targets[train].mean()
            expected = np.sqrt(np.mean((data.targets[test] - mean) ** 2))
            assert value == pytest.approx(expected)

    def test_deterministic(self):
        """Two runs with one seed give identical scores."""
        data = make_sine_toy(80, seed=4)
        recipe = Recipe(algorithm="gradient", n_layers=2, feature_dim=16)
        a = kfold_evaluate(data, 4, recipe, seed=5)
        b = kfold_evaluate(data, 4, recipe, seed=5)
        assert a.scores == b.scores

    def test_parallel_equals_serial(self):
        """Thread-pool folds reproduce the serial scores exactly."""
        data = make_sine_toy(80, seed=6)
        recipe = Recipe(algorithm="greedy", n_layers=2, feature_dim=16)
        serial = kfold_evaluate(data, 4, recipe, seed=1, runner=ParallelRunner(parallel=False))
        threaded = kfold_evaluate(data, 4, recipe, seed=1, runner=ParallelRunner(max_workers=4))
        assert serial.scores == threaded.scores

    def test_held_out_rows_do_not_leak(self):
        """Changing a fold's held-out rows leaves that fold's statistics and training inputs unchanged."""
        rng = np.random.default_rng(10)
        X = rng.standard_normal((40, 3))
        y = rng.standard_normal(40)
        plan = make_cv_plan(40, 4, seed=3)
        train_idx, test_idx = plan.split(0)
        X_mut, y_mut = X.copy(), y.copy()
        X_mut[test_idx] = 1e3 * rng.standard_normal((test_idx.size, 3)) + 50.0
        y_mut[test_idx] += 100.0
        data, mutated = from_arrays(X, y), from_arrays(X_mut, y_mut)

        original_stats = Preprocessor.fit(data.subset(train_idx), standardize_target=True)
        mutated_stats = Preprocessor.fit(mutated.subset(train_idx), standardize_target=True)
        assert original_stats == mutated_stats

        def recorder(store):
            def trainer(train, seed):
                store.append(train.features.copy())
                return _MeanModel(0.0)
            return trainer

        seen_original, seen_mutated = [], []
        kfold_evaluate(data, 4, recorder(seen_original), seed=3, standardize_target=True)
        kfold_evaluate(mutated, 4, recorder(seen_mutated), seed=3, standardize_target=True)
        np.testing.assert_array_equal(seen_original[0], seen_mutated[0])
        # the mutated rows are training rows in the other folds
        assert not np.array_equal(seen_original[1], seen_mutated[1])

    def test_fold_seeds_derived(self):
        """Each fold trains with derive_seed(model_seed, fold)."""
        data = make_sine_toy(30, seed=7)
        seen = []

        def trainer(train, seed):
            seen.append(seed)
            return _MeanModel(0.0)

        kfold_evaluate(data, 3, trainer, seed=0, model_seed=42)
        assert seen == [derive_seed(42, fold) for fold in range(3)]

    def test_chance_level(self):
        """Logistic regression on random labels scores near 1/K."""
        rng = np.random.default_rng(8)
        data = from_arrays(rng.standard_normal((300, 2)), rng.integers(0, 3, size=300),
                           task="classification", n_classes=3)
        result = kfold_evaluate(data, 5, Recipe(algorithm="logistic"), seed=0)
        assert result.metric == "accuracy"
        assert 0.2 <= result.mean <= 0.47

    def test_result_frame(self):
        """to_frame has one row per fold; sd uses ddof = 1."""
        data = make_sine_toy(40, seed=9)
        result = kfold_evaluate(data, 4, _mean_trainer, seed=0)
        frame = result.to_frame()
        assert list(frame.columns) == ["fold", "rmse", "seconds"]
        assert len(frame) == 4
        assert result.sd == pytest.approx(np.std(result.scores, ddof=1))
        assert "seconds" not in result.to_dict(include_timing=False)
