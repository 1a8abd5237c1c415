"""Tests for the boosting loops, baselines and model forward pass."""

import numpy as np
import pytest

from src.boosting import (
    InitialMapKind,
    build_initial_map,
    fit_recipe,
    loss_for,
    train_gradient,
    train_greedy_mse,
    train_logistic,
    train_rfnn,
    train_ridge,
)
from src.exceptions import ConfigurationError, InvalidInput
from src.harness import make_blobs, make_concentric_circles, make_sine_toy
from src.losses import LossKind, fit_top_linear
from src.serialization import dumps_model
from src.validation import Recipe, TrainConfig


@pytest.fixture(scope="module")
def sine():
    data = make_sine_toy(256, seed=0)
    return data.features, data.targets


@pytest.fixture(scope="module")
def rings():
    data = make_concentric_circles(n=450, rings=3, classes=3, noise_sd=0.01, seed=0)
    return data.features, data.targets


def _rmse_from_risk(risk):
    # MSE risk is half the mean squared error
    return np.sqrt(2.0 * risk)


# =============================================================================
# Exact-greedy MSE
# =============================================================================

class TestGreedyMse:
    """Closed-form sandwiched least-squares rounds."""

    def test_zero_blocks_is_ridge(self, sine):
        """T = 0 reproduces ridge regression on x."""
        X, Y = sine
        model = train_greedy_mse(X, Y, TrainConfig(n_layers=0, l2_linpred=1e-3))
        ridge = train_ridge(X, Y, 1e-3)
        np.testing.assert_allclose(model.head.W, ridge.head.W, atol=1e-12)
        np.testing.assert_allclose(model.predict(X).values, ridge.predict(X).values, atol=1e-12)
        assert model.risk_trace == pytest.approx(ridge.risk_trace)

    @pytest.mark.parametrize("seed", range(20))
    def test_risk_never_increases(self, sine, seed):
        """With lambda = 0 and eta = 1 every round is no worse than the last."""
        X, Y = sine
        cfg = TrainConfig(n_layers=10, l2_linpred=0.0, l2_ghat=0.0, boost_lr=1.0, feature_dim=64, seed=seed)
        trace = np.asarray(train_greedy_mse(X, Y, cfg).risk_trace)
        assert np.all(np.diff(trace) <= 1e-8 * trace[0])

    def test_sine_rmse_drops(self, sine):
        """Five blocks cut the training RMSE by at least 25%."""
        X, Y = sine
        model = train_greedy_mse(X, Y, TrainConfig(n_layers=5, feature_dim=64))
        assert _rmse_from_risk(model.risk_trace[5]) <= 0.75 * _rmse_from_risk(model.risk_trace[0])

    def test_trace_matches_forward_pass(self, sine):
        """The last recorded risk equals the risk of the returned model."""
        X, Y = sine
        model = train_greedy_mse(X, Y, TrainConfig(n_layers=3, feature_dim=32, use_feature_norm=True))
        assert model.risk(X, Y) == pytest.approx(model.risk_trace[-1], rel=1e-9)

    @pytest.mark.parametrize("structure", ["scalar", "diagonal"])
    def test_structured_blocks(self, structure):
        """Scalar and diagonal maps run on a projected representation of width p."""
        rng = np.random.default_rng(0)
        X = rng.standard_normal((120, 5))
        Y = np.sin(X[:, :1]) + X[:, 1:2] * X[:, 2:3]
        model = train_greedy_mse(X, Y, TrainConfig(n_layers=3, structure=structure, feature_dim=16))
        assert model.n_blocks == 3
        assert model.width == 16
        assert model.phi0.kind is InitialMapKind.PROJECTION
        assert model.transform(X).shape == (120, 16)
        assert model.risk_trace[-1] < model.risk_trace[0]

    def test_dead_layer_kept_with_zero_step(self):
        """All-zero features make every round degenerate; blocks are kept with step 0."""
        rng = np.random.default_rng(1)
        X, Y = rng.standard_normal((30, 3)), rng.standard_normal((30, 1))
        cfg = TrainConfig(n_layers=2, structure="scalar", feature_scheme="iid", feature_scale=0.0,
                          l2_ghat=0.0, hidden_dim=4, feature_dim=4)
        model = train_greedy_mse(X, Y, cfg)
        assert model.n_blocks == 2
        assert all(block.step == 0.0 for block in model.blocks)
        assert model.risk_trace[0] == model.risk_trace[1] == model.risk_trace[2]

    def test_row_mismatch(self, sine):
        """X and Y of different lengths raise InvalidInput."""
        X, Y = sine
        with pytest.raises(InvalidInput):
            train_greedy_mse(X, Y[:-1], TrainConfig(n_layers=1))


# =============================================================================
# Gradient-greedy
# =============================================================================

class TestGradientBoosting:
    """Functional-gradient rounds with a line search."""

    def test_zero_blocks_is_top_linear(self, rings):
        """T = 0 gives exactly the top-level fit on x."""
        X, labels = rings
        kind = LossKind.cce(3)
        model = train_gradient(X, labels, TrainConfig(n_layers=0, l2_linpred=1e-3), kind)
        head = fit_top_linear(kind, X, labels, 1e-3)
        np.testing.assert_allclose(model.head.W, head.W)
        np.testing.assert_allclose(model.head.bias, head.bias)

    def test_exact_fit_stops_early(self):
        """y = 2x + 1 is fitted exactly at t = 0, so no block is added."""
        X = np.array([[-2.0], [-1.0], [1.0], [2.0]])
        Y = 2.0 * X + 1.0
        model = train_gradient(X, Y, TrainConfig(n_layers=3, l2_linpred=0.0, phi0="identity"), LossKind.mse())
        assert model.n_blocks == 0
        assert model.risk_trace == (0.0,)

    def test_cce_risk_decreases(self, rings):
        """Three blocks lower the training risk on concentric rings."""
        X, labels = rings
        model = train_gradient(X, labels, TrainConfig(n_layers=3, feature_dim=64), LossKind.cce(3))
        assert model.n_blocks == 3
        assert model.risk_trace[-1] <= 0.9 * model.risk_trace[0]
        assert model.risk(X, labels) == pytest.approx(model.risk_trace[-1], rel=1e-9)

    def test_mse_risk_decreases(self, sine):
        """Gradient boosting with squared loss improves on the linear start."""
        X, Y = sine
        model = train_gradient(X, Y, TrainConfig(n_layers=3, feature_dim=64), LossKind.mse())
        assert model.risk_trace[-1] < model.risk_trace[0]

    def test_bce_probabilities(self):
        """BCE models return two-column probabilities that sum to one."""
        data = make_blobs(n=120, seed=2)
        model = train_gradient(data.features, data.targets, TrainConfig(n_layers=2, feature_dim=32),
                               LossKind.bce())
        prediction = model.predict(data.features)
        assert prediction.probabilities.shape == (120, 2)
        np.testing.assert_allclose(prediction.probabilities.sum(axis=1), 1.0)
        np.testing.assert_array_equal(prediction.labels, np.argmax(prediction.probabilities, axis=1))

    def test_representations(self, rings):
        """representations() returns Phi_0 .. Phi_T, all of width D."""
        X, labels = rings
        model = train_gradient(X, labels, TrainConfig(n_layers=3, hidden_dim=2, feature_dim=32),
                               LossKind.cce(3))
        reps = model.representations(X)
        assert len(reps) == 4
        assert all(r.shape == (X.shape[0], 2) for r in reps)
        np.testing.assert_allclose(reps[-1], model.transform(X))


# =============================================================================
# Determinism and the forward pass
# =============================================================================

class TestModelBehaviour:
    """Forward pass, seeding and input checks."""

    @pytest.mark.parametrize("algorithm", ["greedy", "gradient"])
    def test_same_seed_same_model(self, sine, algorithm):
        """Two runs with one seed serialize to identical documents."""
        X, Y = sine
        cfg = TrainConfig(n_layers=2, feature_dim=16, seed=11)
        train = train_greedy_mse if algorithm == "greedy" else (
            lambda X, Y, c: train_gradient(X, Y, c, LossKind.mse()))
        assert dumps_model(train(X, Y, cfg)) == dumps_model(train(X, Y, cfg))

    def test_different_seeds_differ(self, sine):
        """Changing the seed changes the sampled layers."""
        X, Y = sine
        a = train_greedy_mse(X, Y, TrainConfig(n_layers=1, feature_dim=16, seed=1))
        b = train_greedy_mse(X, Y, TrainConfig(n_layers=1, feature_dim=16, seed=2))
        assert not np.array_equal(a.blocks[0].layer.weights, b.blocks[0].layer.weights)

    def test_zero_block_prediction(self):
        """A zero-block model predicts x W + b."""
        rng = np.random.default_rng(3)
        X = rng.standard_normal((20, 3))
        Y = X @ np.array([[1.0], [2.0], [-1.0]]) + 0.5
        model = train_ridge(X, Y, 0.0)
        expected = X @ model.head.W + model.head.bias
        np.testing.assert_allclose(model.predict(X).values, expected)
        np.testing.assert_allclose(model.predict(X).values, Y, atol=1e-10)

    def test_feature_count_mismatch(self, sine):
        """Predicting with the wrong number of columns raises InvalidInput."""
        X, Y = sine
        model = train_greedy_mse(X, Y, TrainConfig(n_layers=1, feature_dim=8))
        with pytest.raises(InvalidInput, match="Feature count"):
            model.predict(np.ones((3, 2)))

    def test_identity_width_conflict(self, sine):
        """An identity Phi_0 with hidden_dim != q is a configuration error."""
        X, Y = sine
        with pytest.raises(ConfigurationError):
            train_greedy_mse(X, Y, TrainConfig(n_layers=1, phi0="identity", hidden_dim=3))

    def test_projection_phi0(self):
        """A projection Phi_0 has a D x q matrix drawn from the round-0 stream."""
        a = build_initial_map(TrainConfig(phi0="projection", hidden_dim=3, seed=4), q=6)
        b = build_initial_map(TrainConfig(phi0="projection", hidden_dim=3, seed=4), q=6)
        assert a.matrix.shape == (3, 6)
        np.testing.assert_array_equal(a.matrix, b.matrix)

    def test_default_projection_width(self):
        """Without hidden_dim a projection Phi_0 has width min(q, 128)."""
        assert build_initial_map(TrainConfig(phi0="projection"), q=300).width == 128
        assert build_initial_map(TrainConfig(phi0="projection"), q=7).width == 7


# =============================================================================
# Baselines and recipes
# =============================================================================

class TestBaselines:
    """RFNN, ridge and logistic regression as zero-block models."""

    def test_rfnn_zero_features_predicts_mean(self, sine):
        """Zero-scale IID features carry no signal, so RFNN predicts the target mean."""
        X, Y = sine
        model = train_rfnn(X, Y, LossKind.mse(), TrainConfig(feature_scheme="iid", feature_scale=0.0,
                                                             feature_dim=8))
        np.testing.assert_allclose(model.predict(X).values, np.full_like(Y, Y.mean()), atol=1e-12)

    def test_rfnn_separates_blobs(self):
        """A single SWIM layer classifies well-separated blobs."""
        data = make_blobs(n=200, seed=0)
        model = train_rfnn(data.features, data.targets, LossKind.cce(2), TrainConfig(feature_dim=64))
        assert model.n_blocks == 0
        assert np.mean(model.predict(data.features).labels == data.targets) >= 0.99

    def test_logistic(self):
        """Logistic regression on blobs uses an identity map and CCE."""
        data = make_blobs(n=100, seed=1, n_classes=3, n_features=3)
        model = train_logistic(data.features, data.targets, 3, 1e-3)
        assert model.loss == LossKind.cce(3)
        assert model.algorithm == "logistic"
        assert np.mean(model.predict(data.features).labels == data.targets) >= 0.95


class TestFitRecipe:
    """Dispatch from a recipe and a preprocessed dataset."""

    def test_greedy_on_classification(self):
        """Greedy MSE boosting refuses a classification target."""
        with pytest.raises(InvalidInput, match="regression"):
            fit_recipe(Recipe(algorithm="greedy"), make_blobs(n=40))

    def test_logistic_on_regression(self):
        """Logistic regression refuses a regression target."""
        with pytest.raises(InvalidInput, match="classification"):
            fit_recipe(Recipe(algorithm="logistic"), make_sine_toy(40))

    def test_seed_override(self):
        """The seed argument replaces the recipe's seed."""
        model = fit_recipe(Recipe(algorithm="rfnn", feature_dim=8, seed=0), make_sine_toy(40), seed=5)
        assert model.hyper["seed"] == 5

    def test_loss_selection(self):
        """Binary data uses CCE unless BCE is requested."""
        blobs = make_blobs(n=40)
        assert loss_for(blobs, Recipe()) == LossKind.cce(2)
        assert loss_for(blobs, Recipe(binary_loss="bce")) == LossKind.bce()
        assert loss_for(make_sine_toy(10), Recipe()) == LossKind.mse()

    def test_metadata_kept(self):
        """Metadata passed to fit_recipe ends up on the model."""
        model = fit_recipe(Recipe(algorithm="ridge"), make_sine_toy(30), metadata={"note": "x"})
        assert model.metadata == {"note": "x"}
