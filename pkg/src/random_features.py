"""Frozen random feature layers over the concatenation [Phi; x].

Two sampling schemes are supported:

- IID: weights and biases drawn i.i.d. Normal(0, scale^2).
- SWIM: pair-sampled weights. Each neuron is built from two training points
  x1, x2 so that its pre-activation is -c1 at x1 and c2 - c1 at x2. Pairs are
  drawn with probability proportional to ||dy|| / (||dx|| + eps), which favours
  pairs across which the target changes quickly.

Layers are immutable once sampled and can be shared between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from src.config import config
from src.exceptions import DegeneratePairs, InvalidInput
from src.logging_config import get_logger
from src.numeric_kernels import as_matrix

logger = get_logger(__name__)


class FeatureScheme(str, Enum):
    """How the weights of a random feature layer are drawn."""
    IID = "iid"
    SWIM = "swim"


@dataclass(frozen=True)
class SwimConfig:
    """SWIM sampling settings.

    ``c2`` is the weight scale (the "SWIM scale" hyperparameter); ``c1`` is
    always ``c2 / 2`` so the two anchor pre-activations are symmetric around 0.
    """

    c2: float = config.DEFAULT_FEATURE_SCALE
    eps: float = config.SWIM_EPS
    seed: int = 0

    def __post_init__(self):
        if not self.c2 > 0:
            raise InvalidInput("SWIM scale c2 must be positive", component="random_features",
                               details={"c2": self.c2})
        if not self.eps > 0:
            raise InvalidInput("SWIM eps must be positive", component="random_features",
                               details={"eps": self.eps})

    @property
    def c1(self) -> float:
        return self.c2 / 2.0


@dataclass(frozen=True)
class RandomFeatureLayer:
    """p tanh neurons over an input of width D + q.

    Attributes:
        weights: p x (D + q), one row per neuron
        biases: length p
        scheme: sampling scheme that produced the layer
        scale: IID standard deviation or SWIM c2
        anchors: for SWIM layers, p x 2 row indices (x1, x2) into the
            sampling inputs; None for IID layers
    """

    weights: np.ndarray
    biases: np.ndarray
    scheme: FeatureScheme
    scale: float
    anchors: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        weights = as_matrix(self.weights, "layer weights")
        biases = np.asarray(self.biases, dtype=np.float64).reshape(-1)
        if biases.shape[0] != weights.shape[0]:
            raise InvalidInput(
                "Layer needs one bias per neuron",
                component="random_features",
                details={"neurons": weights.shape[0], "biases": biases.shape[0]},
            )
        if not np.all(np.isfinite(biases)):
            raise InvalidInput("Layer biases must be finite", component="random_features")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "biases", biases)
        object.__setattr__(self, "scheme", FeatureScheme(self.scheme))

    @property
    def p(self) -> int:
        return self.weights.shape[0]

    @property
    def input_dim(self) -> int:
        return self.weights.shape[1]

    def preactivation(self, inputs) -> np.ndarray:
        """inputs @ weights^T + biases for inputs of shape n x input_dim."""
        inputs = as_matrix(inputs, "layer inputs", allow_1d=True)
        if inputs.shape[1] != self.input_dim:
            raise InvalidInput(
                "Layer input width mismatch",
                component="random_features",
                details={"expected": self.input_dim, "found": inputs.shape[1]},
            )
        return inputs @ self.weights.T + self.biases

    def transform(self, inputs) -> np.ndarray:
        return np.tanh(self.preactivation(inputs))


@dataclass(frozen=True)
class FeatureNorm:
    """Per-feature standardization frozen at training time."""

    mean: np.ndarray
    scale: np.ndarray

    def apply(self, F: np.ndarray) -> np.ndarray:
        return (F - self.mean) / self.scale


def fit_feature_norm(F) -> FeatureNorm:
    """Column mean and population std of F; near-constant columns get scale 1."""
    F = as_matrix(F, "features")
    mean = F.mean(axis=0)
    std = F.std(axis=0)
    scale = np.where(std > config.FEATURE_NORM_FLOOR, std, 1.0)
    return FeatureNorm(mean=mean, scale=scale)


def concat_inputs(phi, x) -> np.ndarray:
    """Row-wise [phi_i; x_i]."""
    phi = as_matrix(phi, "phi", allow_1d=True)
    x = as_matrix(x, "x", allow_1d=True)
    if phi.shape[0] != x.shape[0]:
        raise InvalidInput(
            "phi and x must have the same number of rows",
            component="random_features",
            details={"phi_rows": phi.shape[0], "x_rows": x.shape[0]},
        )
    return np.hstack([phi, x])


def apply_layer(layer: RandomFeatureLayer, phi, x) -> np.ndarray:
    """tanh(weights [phi; x] + biases), row by row."""
    return layer.transform(concat_inputs(phi, x))


def sample_iid_layer(input_dim: int, p: int, scale: float,
                     seed: int | np.random.Generator | None = None) -> RandomFeatureLayer:
    """Dense layer with weights and biases i.i.d. Normal(0, scale^2)."""
    if input_dim < 1 or p < 1:
        raise InvalidInput("Layer dimensions must be positive", component="random_features",
                           details={"input_dim": input_dim, "p": p})
    if scale < 0:
        raise InvalidInput("Feature scale must be nonnegative", component="random_features",
                           details={"scale": scale})
    rng = np.random.default_rng(seed)
    weights = rng.standard_normal((p, input_dim)) * scale
    biases = rng.standard_normal(p) * scale
    return RandomFeatureLayer(weights=weights, biases=biases, scheme=FeatureScheme.IID,
                              scale=float(scale))


@dataclass(frozen=True)
class SwimCandidates:
    """Candidate pairs (first[k], second[k]).

    ``row_touches[i]`` counts how often row i was addressed while the pairs
    were built: once as itself, plus once per pair that looked it up as a
    partner.
    """

    first: np.ndarray
    second: np.ndarray
    row_touches: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __len__(self) -> int:
        return self.first.shape[0]

    @property
    def touches(self) -> int:
        return int(self.row_touches.sum())


def build_swim_candidates(n: int, rng: np.random.Generator) -> SwimCandidates:
    """Pair every row i with (i + j_i) mod n, j_i uniform on 1..n-1.

    Every row is addressed once as itself and each pair makes one partner
    lookup, so construction is linear in n.
    """
    if n < 2:
        raise InvalidInput("SWIM sampling needs at least two rows", component="random_features",
                           details={"n": n})
    first = np.arange(n)
    offsets = rng.integers(1, n, size=n)
    second = (first + offsets) % n
    row_touches = np.bincount(first, minlength=n) + np.bincount(second, minlength=n)
    return SwimCandidates(first=first, second=second, row_touches=row_touches)


def swim_pair_probabilities(inputs, targets, pairs: SwimCandidates,
                            eps: float = config.SWIM_EPS) -> np.ndarray:
    """Sampling distribution over candidate pairs.

    q_k = ||y2 - y1|| / (||x2 - x1|| + eps), zero for coincident inputs.
    When every distinct pair has q = 0 (constant targets) the distribution is
    uniform over distinct pairs.
    """
    inputs = as_matrix(inputs, "inputs", allow_1d=True)
    targets = as_matrix(targets, "targets", allow_1d=True)
    dx = np.linalg.norm(inputs[pairs.second] - inputs[pairs.first], axis=1)
    dy = np.linalg.norm(targets[pairs.second] - targets[pairs.first], axis=1)
    distinct = dx > 0
    if not np.any(distinct):
        raise DegeneratePairs(
            "All SWIM candidate pairs have coincident inputs",
            component="random_features",
            details={"pairs": len(pairs)},
        )
    q = np.where(distinct, dy / (dx + eps), 0.0)
    total = q.sum()
    if total <= 0:
        logger.debug("SWIM targets constant on all pairs, sampling uniformly", pairs=len(pairs))
        q = distinct.astype(np.float64)
        total = q.sum()
    return q / total


def sample_swim_layer(inputs, targets, p: int, cfg: SwimConfig,
                      rng: np.random.Generator | None = None) -> RandomFeatureLayer:
    """Pair-sampled layer over ``inputs`` (n x (D + q)).

    Targets are regression outputs or one-hot class codes (n x d).
    """
    inputs = as_matrix(inputs, "inputs", allow_1d=True)
    targets = as_matrix(targets, "targets", allow_1d=True)
    if targets.shape[0] != inputs.shape[0]:
        raise InvalidInput(
            "inputs and targets must have the same number of rows",
            component="random_features",
            details={"inputs": inputs.shape[0], "targets": targets.shape[0]},
        )
    if p < 1:
        raise InvalidInput("Layer needs at least one neuron", component="random_features",
                           details={"p": p})
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)

    pairs = build_swim_candidates(inputs.shape[0], rng)
    probs = swim_pair_probabilities(inputs, targets, pairs, cfg.eps)
    chosen = rng.choice(len(pairs), size=p, replace=True, p=probs)

    i1 = pairs.first[chosen]
    i2 = pairs.second[chosen]
    x1 = inputs[i1]
    diff = inputs[i2] - x1
    sq = np.sum(diff * diff, axis=1)
    weights = cfg.c2 * diff / sq[:, None]
    biases = -np.sum(weights * x1, axis=1) - cfg.c1
    return RandomFeatureLayer(
        weights=weights,
        biases=biases,
        scheme=FeatureScheme.SWIM,
        scale=float(cfg.c2),
        anchors=np.column_stack([i1, i2]),
    )


def sample_layer(scheme: FeatureScheme, inputs, targets, p: int, scale: float,
                 rng: np.random.Generator, eps: float = config.SWIM_EPS) -> RandomFeatureLayer:
    """Draw a layer of ``p`` neurons over the columns of ``inputs``."""
    scheme = FeatureScheme(scheme)
    if scheme is FeatureScheme.IID:
        width = np.shape(inputs)[1] if np.ndim(inputs) == 2 else 1
        return sample_iid_layer(width, p, scale, rng)
    return sample_swim_layer(inputs, targets, p, SwimConfig(c2=scale, eps=eps), rng=rng)
