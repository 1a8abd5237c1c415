"""
Random feature representation boosting.

Builds a residual representation Phi_T(x) = Phi_0(x) + sum_t step_t A_t f_t(x)
one block at a time, where f_t is a frozen random feature layer over
[Phi_{t-1}(x); x], and refits a linear head W on top after every block.

Two training loops:
- train_greedy_mse: exact-greedy rounds for squared loss. Each A_t is the
  closed-form sandwiched least-squares fit to the current residuals.
- train_gradient: gradient-greedy rounds for MSE, BCE or CCE. Each A_t fits
  the normalized negative functional gradient, followed by a line search
  for the step size.

Baselines (RFNN, ridge, logistic) are zero-block models.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Any

import numpy as np
from scipy.special import expit, softmax

from src.config import config
from src.exceptions import ConfigurationError, DegenerateProblem, InvalidInput, SingularSystem, ZeroGradient
from src.logging_config import Timer, get_logger
from src.losses import (
    LinearHead,
    LossKind,
    LossName,
    empirical_risk,
    encode_targets,
    fit_gradient_direction,
    fit_top_linear,
    functional_gradient,
    line_search,
)
from src.numeric_kernels import as_matrix
from src.random_features import (
    FeatureNorm,
    RandomFeatureLayer,
    concat_inputs,
    fit_feature_norm,
    sample_layer,
)
from src.sandwich import SandwichProblem, SandwichStructure, apply_map, solve_sandwich
from src.utils import derive_rng
from src.validation import Recipe, TrainConfig

if TYPE_CHECKING:
    from src.harness.data import Dataset

logger = get_logger(__name__)

# dead-layer policy: the first draw plus one resample
_LAYER_ATTEMPTS = 2


class InitialMapKind(str, Enum):
    IDENTITY = "identity"
    PROJECTION = "projection"
    RANDOM_FEATURES = "random_features"


@dataclass(frozen=True)
class InitialMap:
    """Phi_0: identity, a fixed random projection, or a random feature layer."""

    kind: InitialMapKind
    input_dim: int
    matrix: np.ndarray | None = None
    layer: RandomFeatureLayer | None = None
    norm: FeatureNorm | None = None

    @classmethod
    def identity(cls, q: int) -> InitialMap:
        return cls(InitialMapKind.IDENTITY, q)

    @classmethod
    def random_projection(cls, q: int, D: int, rng: np.random.Generator) -> InitialMap:
        """D x q matrix with entries Normal(0, 1/q)."""
        return cls(InitialMapKind.PROJECTION, q, matrix=rng.standard_normal((D, q)) / np.sqrt(q))

    @classmethod
    def random_features(cls, layer: RandomFeatureLayer, norm: FeatureNorm | None = None) -> InitialMap:
        return cls(InitialMapKind.RANDOM_FEATURES, layer.input_dim, layer=layer, norm=norm)

    @property
    def width(self) -> int:
        if self.kind is InitialMapKind.IDENTITY:
            return self.input_dim
        if self.kind is InitialMapKind.PROJECTION:
            return self.matrix.shape[0]
        return self.layer.p

    def apply(self, X: np.ndarray) -> np.ndarray:
        if X.shape[1] != self.input_dim:
            raise InvalidInput(
                "Feature count does not match the model",
                component="boosting",
                details={"expected": self.input_dim, "found": X.shape[1]},
            )
        if self.kind is InitialMapKind.IDENTITY:
            return X.copy()
        if self.kind is InitialMapKind.PROJECTION:
            return X @ self.matrix.T
        F = self.layer.transform(X)
        return self.norm.apply(F) if self.norm is not None else F


@dataclass(frozen=True)
class ResidualBlock:
    """One round: Phi <- Phi + step * A f(Phi, x)."""

    layer: RandomFeatureLayer
    structure: SandwichStructure
    A: float | np.ndarray
    step: float
    norm: FeatureNorm | None = None

    def features(self, phi: np.ndarray, x: np.ndarray) -> np.ndarray:
        F = self.layer.transform(concat_inputs(phi, x))
        return self.norm.apply(F) if self.norm is not None else F

    def increment(self, phi: np.ndarray, x: np.ndarray) -> np.ndarray:
        return self.step * apply_map(self.A, self.structure, self.features(phi, x))


@dataclass(frozen=True)
class Prediction:
    """Model output: ``values`` for regression, ``labels`` and ``probabilities`` for classification."""

    values: np.ndarray | None = None
    labels: np.ndarray | None = None
    probabilities: np.ndarray | None = None

    @property
    def is_classification(self) -> bool:
        return self.labels is not None


@dataclass(frozen=True)
class BoostedModel:
    """Trained model: Phi_0, residual blocks, linear head and loss.

    ``risk_trace[t]`` is the training risk after t blocks (index 0 is the
    model on Phi_0 alone). ``metadata`` carries the preprocessing state and
    class names needed to apply the model to raw data.
    """

    phi0: InitialMap
    blocks: tuple[ResidualBlock, ...]
    head: LinearHead
    loss: LossKind
    algorithm: str
    hyper: dict[str, Any] = field(default_factory=dict)
    risk_trace: tuple[float, ...] = ()
    metadata: dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def input_dim(self) -> int:
        return self.phi0.input_dim

    @property
    def width(self) -> int:
        return self.phi0.width

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def W(self) -> np.ndarray:
        return self.head.W

    def _check_input(self, X) -> np.ndarray:
        X = as_matrix(X, "X", allow_1d=True)
        if X.shape[1] != self.input_dim:
            raise InvalidInput(
                "Feature count does not match the model",
                component="boosting",
                details={"expected": self.input_dim, "found": X.shape[1]},
            )
        return X

    def representations(self, X) -> list[np.ndarray]:
        """[Phi_0(X), Phi_1(X), ..., Phi_T(X)]."""
        X = self._check_input(X)
        phi = self.phi0.apply(X)
        out = [phi]
        for block in self.blocks:
            phi = phi + block.increment(phi, X)
            out.append(phi)
        return out

    def transform(self, X) -> np.ndarray:
        """Phi_T(X)."""
        X = self._check_input(X)
        phi = self.phi0.apply(X)
        for block in self.blocks:
            phi = phi + block.increment(phi, X)
        return phi

    def decision_function(self, X) -> np.ndarray:
        return self.head.logits(self.transform(X))

    def predict(self, X) -> Prediction:
        Z = self.decision_function(X)
        if self.loss.name is LossName.MSE:
            return Prediction(values=Z)
        if self.loss.name is LossName.BCE:
            p1 = expit(Z[:, 0])
            probs = np.column_stack([1.0 - p1, p1])
        else:
            probs = softmax(Z, axis=1)
        return Prediction(labels=np.argmax(probs, axis=1), probabilities=probs)

    def risk(self, X, Y) -> float:
        return empirical_risk(self.loss, self.head.W, self.transform(X), Y, self.head.bias)


def predict(model: BoostedModel, X) -> Prediction:
    """Forward pass through Phi_0, every block and the linear head."""
    return model.predict(X)


# =============================================================================
# Training helpers
# =============================================================================

def _resolve_width(cfg: TrainConfig, q: int, square_blocks: bool) -> tuple[str, int]:
    """Pick the Phi_0 kind and representation width D."""
    if square_blocks:
        D = cfg.hidden_dim if cfg.hidden_dim is not None else cfg.feature_dim
        if D != cfg.feature_dim:
            raise ConfigurationError(
                f"{cfg.structure.value} structure requires feature_dim == hidden_dim",
                component="boosting",
                details={"feature_dim": cfg.feature_dim, "hidden_dim": D},
            )
        return "projection", D

    if cfg.phi0 == "projection":
        D = cfg.hidden_dim if cfg.hidden_dim is not None else min(q, config.MAX_DEFAULT_HIDDEN_DIM)
        return "projection", D
    if cfg.phi0 == "identity" or cfg.hidden_dim is None or cfg.hidden_dim == q:
        if cfg.hidden_dim is not None and cfg.hidden_dim != q:
            raise ConfigurationError(
                "identity phi0 requires hidden_dim == number of input features",
                component="boosting",
                details={"hidden_dim": cfg.hidden_dim, "features": q},
            )
        return "identity", q
    return "projection", cfg.hidden_dim


def build_initial_map(cfg: TrainConfig, q: int, square_blocks: bool = False) -> InitialMap:
    kind, D = _resolve_width(cfg, q, square_blocks)
    if kind == "identity":
        return InitialMap.identity(q)
    return InitialMap.random_projection(q, D, derive_rng(cfg.seed, 0, 0))


def _draw_features(cfg: TrainConfig, inputs: np.ndarray, targets: np.ndarray,
                   rng: np.random.Generator) -> tuple[RandomFeatureLayer, np.ndarray, FeatureNorm | None]:
    layer = sample_layer(cfg.feature_scheme, inputs, targets, cfg.feature_dim, cfg.feature_scale,
                         rng, eps=cfg.swim.eps)
    F = layer.transform(inputs)
    norm = None
    if cfg.use_feature_norm:
        norm = fit_feature_norm(F)
        F = norm.apply(F)
    return layer, F, norm


def _zero_solution(structure: SandwichStructure, D: int, p: int) -> float | np.ndarray:
    if structure is SandwichStructure.SCALAR:
        return 0.0
    if structure is SandwichStructure.DIAGONAL:
        return np.zeros(D)
    return np.zeros((D, p))


def _snapshot(cfg: TrainConfig) -> dict[str, Any]:
    return cfg.model_dump(mode="json")


# =============================================================================
# Training loops
# =============================================================================

def train_greedy_mse(X, Y, cfg: TrainConfig, metadata: dict[str, Any] | None = None) -> BoostedModel:
    """Exact-greedy boosting for squared loss.

    Per round: sample a layer on [Phi; x], solve the sandwiched least-squares
    problem for A against the current residuals and head, add eta * A f to
    Phi, then refit the head by ridge regression.

    A dead layer (degenerate or singular sandwich system) is resampled once
    from a fresh stream; if that also fails the block is kept with step 0.
    """
    X = as_matrix(X, "X", allow_1d=True)
    kind = LossKind.mse()
    T = encode_targets(kind, Y)
    if T.shape[0] != X.shape[0]:
        raise InvalidInput("X and Y must have the same number of rows", component="boosting",
                           details={"X": X.shape, "Y": T.shape})
    structure = SandwichStructure(cfg.structure)
    square = structure is not SandwichStructure.DENSE

    with Timer("train_greedy_mse", logger):
        phi0 = build_initial_map(cfg, X.shape[1], square_blocks=square)
        Phi = phi0.apply(X)
        head = fit_top_linear(kind, Phi, T, cfg.l2_linpred, cfg.fit_intercept)
        trace = [empirical_risk(kind, head.W, Phi, T, head.bias)]
        blocks: list[ResidualBlock] = []

        for t in range(1, cfg.n_layers + 1):
            inputs = np.hstack([Phi, X])
            R = T - head.logits(Phi)
            solution = None
            for attempt in range(_LAYER_ATTEMPTS):
                layer, F, norm = _draw_features(cfg, inputs, T, derive_rng(cfg.seed, t, attempt))
                try:
                    solution = solve_sandwich(SandwichProblem(R=R, W=head.W, Z=F, lam=cfg.l2_ghat), structure)
                    break
                except (DegenerateProblem, SingularSystem) as e:
                    logger.warning("Dead random layer", round=t, attempt=attempt, error=e.message)

            step = cfg.boost_lr
            if solution is None:
                logger.warning("Skipping block after resample", round=t)
                solution = _zero_solution(structure, Phi.shape[1], F.shape[1])
                step = 0.0

            block = ResidualBlock(layer=layer, structure=structure, A=solution, step=step, norm=norm)
            Phi = Phi + step * apply_map(solution, structure, F)
            head = fit_top_linear(kind, Phi, T, cfg.l2_linpred, cfg.fit_intercept)
            blocks.append(block)
            trace.append(empirical_risk(kind, head.W, Phi, T, head.bias))
            logger.debug("Greedy round", round=t, risk=trace[-1], step=step)

    logger.info("Greedy boosting finished", blocks=len(blocks), risk=trace[-1])
    return BoostedModel(
        phi0=phi0,
        blocks=tuple(blocks),
        head=head,
        loss=kind,
        algorithm="greedy",
        hyper=_snapshot(cfg),
        risk_trace=tuple(trace),
        metadata=dict(metadata or {}),
    )


def train_gradient(X, Y, cfg: TrainConfig, kind: LossKind,
                   metadata: dict[str, Any] | None = None) -> BoostedModel:
    """Gradient-greedy boosting for any supported loss.

    Per round: compute the functional gradient G, fit A to -sqrt(n) G/||G||_F
    by ridge regression on fresh random features, line-search the amount of
    say alpha, add eta * alpha * A f to Phi, and refit the head. Stops early
    when G vanishes.
    """
    X = as_matrix(X, "X", allow_1d=True)
    T = encode_targets(kind, Y)
    if T.shape[0] != X.shape[0]:
        raise InvalidInput("X and Y must have the same number of rows", component="boosting",
                           details={"X": X.shape, "Y": T.shape})

    with Timer("train_gradient", logger):
        phi0 = build_initial_map(cfg, X.shape[1])
        Phi = phi0.apply(X)
        head = fit_top_linear(kind, Phi, Y, cfg.l2_linpred, cfg.fit_intercept)
        trace = [empirical_risk(kind, head.W, Phi, Y, head.bias)]
        blocks: list[ResidualBlock] = []

        for t in range(1, cfg.n_layers + 1):
            G = functional_gradient(kind, head.W, Phi, Y, head.bias)
            if G.frobenius_norm == 0.0:
                logger.warning("Functional gradient vanished, stopping early", round=t)
                break

            inputs = np.hstack([Phi, X])
            A = None
            for attempt in range(_LAYER_ATTEMPTS):
                layer, F, norm = _draw_features(cfg, inputs, T, derive_rng(cfg.seed, t, attempt))
                try:
                    A = fit_gradient_direction(F, G, cfg.l2_ghat)
                    break
                except SingularSystem as e:
                    logger.warning("Dead random layer", round=t, attempt=attempt, error=e.message)
                except ZeroGradient:
                    break

            if A is None:
                logger.warning("Skipping block after resample", round=t)
                A = np.zeros((Phi.shape[1], F.shape[1]))
                alpha = 0.0
                direction = np.zeros_like(Phi)
            else:
                direction = F @ A.T
                alpha = line_search(kind, head.W, Phi, direction, Y, head.bias)

            step = cfg.boost_lr * alpha
            blocks.append(ResidualBlock(layer=layer, structure=SandwichStructure.DENSE, A=A,
                                        step=step, norm=norm))
            Phi = Phi + step * direction
            head = fit_top_linear(kind, Phi, Y, cfg.l2_linpred, cfg.fit_intercept, warm_start=head)
            trace.append(empirical_risk(kind, head.W, Phi, Y, head.bias))
            logger.debug("Gradient round", round=t, risk=trace[-1], alpha=alpha, step=step)

    logger.info("Gradient boosting finished", blocks=len(blocks), loss=kind.name.value, risk=trace[-1])
    return BoostedModel(
        phi0=phi0,
        blocks=tuple(blocks),
        head=head,
        loss=kind,
        algorithm="gradient",
        hyper=_snapshot(cfg),
        risk_trace=tuple(trace),
        metadata=dict(metadata or {}),
    )


def train_rfnn(X, Y, kind: LossKind, cfg: TrainConfig,
               metadata: dict[str, Any] | None = None) -> BoostedModel:
    """Single frozen random layer of width cfg.feature_dim on raw x plus a fitted head.

    Uses the feature scheme, scale, normalization flag and l2_linpred of
    ``cfg``; n_layers and the block settings are ignored.
    """
    X = as_matrix(X, "X", allow_1d=True)
    T = encode_targets(kind, Y)
    layer, F, norm = _draw_features(cfg, X, T, derive_rng(cfg.seed, 0, 0))
    phi0 = InitialMap.random_features(layer, norm)
    head = fit_top_linear(kind, F, Y, cfg.l2_linpred, cfg.fit_intercept)
    risk = empirical_risk(kind, head.W, F, Y, head.bias)
    logger.info("RFNN fitted", features=layer.p, risk=risk)
    return BoostedModel(phi0=phi0, blocks=(), head=head, loss=kind, algorithm="rfnn",
                        hyper=_snapshot(cfg), risk_trace=(risk,), metadata=dict(metadata or {}))


def _linear_baseline(X, Y, kind: LossKind, lam: float, algorithm: str, fit_intercept: bool,
                     metadata: dict[str, Any] | None) -> BoostedModel:
    X = as_matrix(X, "X", allow_1d=True)
    phi0 = InitialMap.identity(X.shape[1])
    head = fit_top_linear(kind, X, Y, lam, fit_intercept)
    risk = empirical_risk(kind, head.W, X, Y, head.bias)
    hyper = {"l2_linpred": lam, "fit_intercept": fit_intercept}
    return BoostedModel(phi0=phi0, blocks=(), head=head, loss=kind, algorithm=algorithm,
                        hyper=hyper, risk_trace=(risk,), metadata=dict(metadata or {}))


def train_ridge(X, Y, lam: float, fit_intercept: bool = True,
                metadata: dict[str, Any] | None = None) -> BoostedModel:
    """Ridge regression on the raw features."""
    return _linear_baseline(X, Y, LossKind.mse(), lam, "ridge", fit_intercept, metadata)


def train_logistic(X, labels, n_classes: int, lam: float, fit_intercept: bool = True,
                   metadata: dict[str, Any] | None = None) -> BoostedModel:
    """Multinomial logistic regression on the raw features."""
    return _linear_baseline(X, labels, LossKind.cce(n_classes), lam, "logistic", fit_intercept, metadata)


def loss_for(dataset: Dataset, recipe: Recipe) -> LossKind:
    """MSE for regression, CCE (or BCE when requested for K = 2) for classification."""
    if not dataset.is_classification:
        return LossKind.mse()
    if recipe.binary_loss == "bce" and dataset.n_classes == 2:
        return LossKind.bce()
    return LossKind.cce(dataset.n_classes)


def fit_recipe(recipe: Recipe, dataset: Dataset, seed: int | None = None,
               metadata: dict[str, Any] | None = None) -> BoostedModel:
    """Train the algorithm named by ``recipe`` on a preprocessed dataset."""
    if seed is not None:
        recipe = recipe.with_overrides(seed=seed)
    X = dataset.features
    Y = dataset.targets
    kind = loss_for(dataset, recipe)

    if recipe.algorithm in ("greedy", "ridge") and kind.is_classification:
        raise InvalidInput(f"algorithm '{recipe.algorithm}' needs a regression target",
                           component="boosting")
    if recipe.algorithm == "logistic" and not kind.is_classification:
        raise InvalidInput("algorithm 'logistic' needs a classification target", component="boosting")

    if recipe.algorithm == "greedy":
        return train_greedy_mse(X, Y, recipe, metadata)
    if recipe.algorithm == "gradient":
        return train_gradient(X, Y, recipe, kind, metadata)
    if recipe.algorithm == "rfnn":
        return train_rfnn(X, Y, kind, recipe, metadata)
    if recipe.algorithm == "ridge":
        return train_ridge(X, Y, recipe.l2_linpred, recipe.fit_intercept, metadata)
    return train_logistic(X, Y, kind.n_classes, recipe.l2_linpred, recipe.fit_intercept, metadata)

