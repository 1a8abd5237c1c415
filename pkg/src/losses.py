"""Losses, functional gradients and the convex fits used by the boosting loops.

Conventions:
- ``Phi`` is the n x D representation, ``W`` the D x k top predictor and
  ``bias`` its length-k intercept. Logits are ``Phi @ W + bias``.
- Targets are passed as given by the caller (n x d matrix for MSE, 0/1
  vector for BCE, integer labels for CCE) and encoded once by
  ``encode_targets``.
- MSE is l(x, y) = 1/2 ||x - y||^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, log_expit, logsumexp, softmax

from src.config import config
from src.exceptions import DegenerateProblem, InvalidInput, ZeroGradient
from src.logging_config import get_logger
from src.numeric_kernels import as_matrix, ridge_solve
from src.sandwich import SandwichProblem, sandwich_scalar

logger = get_logger(__name__)


class LossName(str, Enum):
    MSE = "mse"
    BCE = "bce"
    CCE = "cce"


@dataclass(frozen=True)
class LossKind:
    """A loss function, with the class count for CCE."""

    name: LossName
    n_classes: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "name", LossName(self.name))
        if self.name is LossName.CCE:
            if self.n_classes is None or self.n_classes < 2:
                raise InvalidInput("CCE needs a class count K >= 2", component="losses",
                                   details={"n_classes": self.n_classes})
        elif self.name is LossName.BCE:
            object.__setattr__(self, "n_classes", 2)

    @classmethod
    def mse(cls) -> LossKind:
        return cls(LossName.MSE)

    @classmethod
    def bce(cls) -> LossKind:
        return cls(LossName.BCE)

    @classmethod
    def cce(cls, n_classes: int) -> LossKind:
        return cls(LossName.CCE, n_classes)

    @property
    def is_classification(self) -> bool:
        return self.name is not LossName.MSE

    def to_dict(self) -> dict:
        return {"name": self.name.value, "n_classes": self.n_classes}


def encode_targets(kind: LossKind, Y) -> np.ndarray:
    """Targets as a float matrix: Y itself (MSE), a 0/1 column (BCE), one-hot rows (CCE)."""
    if kind.name is LossName.MSE:
        return as_matrix(Y, "Y", allow_1d=True)

    labels = np.asarray(Y)
    if labels.ndim == 2 and labels.shape[1] == 1:
        labels = labels[:, 0]
    if labels.ndim != 1:
        raise InvalidInput("Classification targets must be a label vector", component="losses",
                           details={"shape": labels.shape})
    K = kind.n_classes
    if labels.size and (np.any(labels < 0) or np.any(labels >= K) or np.any(labels != np.round(labels))):
        raise InvalidInput(
            f"Labels must be integers in 0..{K - 1}",
            component="losses",
            details={"min": float(labels.min()), "max": float(labels.max()), "n_classes": K},
        )
    labels = labels.astype(np.int64)
    if kind.name is LossName.BCE:
        return labels.astype(np.float64).reshape(-1, 1)
    return np.eye(K)[labels]


def logits(W, Phi, bias=None) -> np.ndarray:
    """Phi @ W (+ bias), n x k."""
    Z = np.asarray(Phi, dtype=np.float64) @ np.asarray(W, dtype=np.float64)
    if bias is not None:
        Z = Z + np.asarray(bias, dtype=np.float64)
    return Z


def per_sample_loss(kind: LossKind, Z: np.ndarray, T: np.ndarray) -> np.ndarray:
    """l(z_i, y_i) for encoded targets T."""
    if kind.name is LossName.MSE:
        diff = Z - T
        return 0.5 * np.sum(diff * diff, axis=1)
    if kind.name is LossName.BCE:
        # -y log s(z) - (1 - y) log(1 - s(z))
        return -np.sum(T * log_expit(Z) + (1.0 - T) * log_expit(-Z), axis=1)
    return logsumexp(Z, axis=1) - np.sum(Z * T, axis=1)


def output_gradient(kind: LossKind, Z: np.ndarray, T: np.ndarray) -> np.ndarray:
    """Per-sample derivative of l with respect to its first argument, n x k."""
    if kind.name is LossName.MSE:
        return Z - T
    if kind.name is LossName.BCE:
        return expit(Z) - T
    return softmax(Z, axis=1) - T


def empirical_risk(kind: LossKind, W, Phi, Y, bias=None) -> float:
    """Mean loss over the rows of Phi."""
    T = encode_targets(kind, Y)
    Z = logits(W, Phi, bias)
    if Z.shape != T.shape:
        raise InvalidInput("Predictions and targets disagree in shape", component="losses",
                           details={"predictions": Z.shape, "targets": T.shape})
    return float(np.mean(per_sample_loss(kind, Z, T)))


@dataclass(frozen=True)
class FunctionalGradient:
    """Data matrix of the functional gradient, n x D.

    Row i is W dl(W^T phi_i, y_i), so it equals n times the ordinary gradient
    of the mean risk with respect to row i of Phi.
    """

    values: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def inner(self, direction: np.ndarray) -> float:
        """Empirical L2 inner product (1/n) sum_i <direction_i, g_i>."""
        return float(np.sum(self.values * direction) / self.n)


def functional_gradient(kind: LossKind, W, Phi, Y, bias=None) -> FunctionalGradient:
    T = encode_targets(kind, Y)
    W = as_matrix(W, "W", allow_1d=True)
    dL = output_gradient(kind, logits(W, Phi, bias), T)
    return FunctionalGradient(values=dL @ W.T)


def fit_gradient_direction(F, G: FunctionalGradient, lam: float) -> np.ndarray:
    """Ridge fit of -sqrt(n) G / ||G||_F on the features F; returns A (D x p).

    With lam = 0 and an exactly representable target the fitted direction
    has unit empirical L2 norm.
    """
    norm = G.frobenius_norm
    if norm == 0.0 or not np.isfinite(norm):
        raise ZeroGradient("Functional gradient vanishes", component="losses",
                           details={"norm": norm})
    target = -np.sqrt(G.n) * G.values / norm
    return ridge_solve(F, target, lam).T


def _directional_derivatives(kind: LossKind, Z: np.ndarray, V: np.ndarray,
                             T: np.ndarray) -> tuple[float, float]:
    """First and second derivative of alpha -> mean l(Z + alpha V, T) at alpha = 0."""
    dL = output_gradient(kind, Z, T)
    first = float(np.mean(np.sum(dL * V, axis=1)))
    if kind.name is LossName.BCE:
        s = expit(Z)
        second = float(np.mean(np.sum(s * (1.0 - s) * V * V, axis=1)))
    else:
        P = softmax(Z, axis=1)
        pv = np.sum(P * V, axis=1)
        second = float(np.mean(np.sum(P * V * V, axis=1) - pv * pv))
    return first, second


def line_search(kind: LossKind, W, Phi, direction, Y, bias=None) -> float:
    """Step alpha >= 0 minimizing the risk along ``direction``.

    MSE is solved in closed form. BCE and CCE use Newton's method on the
    convex 1-D risk, safeguarded by bisection on [0, alpha_max].
    """
    T = encode_targets(kind, Y)
    W = as_matrix(W, "W", allow_1d=True)
    Z = logits(W, Phi, bias)
    V = np.asarray(direction, dtype=np.float64) @ W

    if kind.name is LossName.MSE:
        k = V.shape[1]
        try:
            alpha = sandwich_scalar(SandwichProblem(R=T - Z, W=np.eye(k), Z=V, lam=0.0))
        except DegenerateProblem:
            return 0.0
        return max(alpha, 0.0)

    g0, _ = _directional_derivatives(kind, Z, V, T)
    if g0 >= 0:
        return 0.0

    lo, hi = 0.0, config.LINE_SEARCH_ALPHA_MAX
    g_hi, _ = _directional_derivatives(kind, Z + hi * V, V, T)
    if g_hi <= 0:
        return hi

    alpha = 0.0
    for _ in range(config.LINE_SEARCH_MAX_ITER):
        g, h = _directional_derivatives(kind, Z + alpha * V, V, T)
        if g == 0:
            return alpha
        if g < 0:
            lo = alpha
        else:
            hi = alpha
        if h > config.NEWTON_CURVATURE_FLOOR:
            candidate = alpha - g / h
        else:
            candidate = 0.5 * (lo + hi)
        if not lo < candidate < hi:
            candidate = 0.5 * (lo + hi)
        if abs(candidate - alpha) <= config.LINE_SEARCH_TOL:
            return candidate
        alpha = candidate
        if hi - lo <= config.LINE_SEARCH_TOL:
            break
    return alpha


@dataclass(frozen=True)
class LinearHead:
    """Top-level linear predictor W (D x k) with intercept."""

    W: np.ndarray
    bias: np.ndarray
    objective_trace: tuple[float, ...] = field(default=(), compare=False)
    n_iter: int = 0
    converged: bool = True

    def logits(self, Phi) -> np.ndarray:
        return logits(self.W, Phi, self.bias)


def regularized_objective(kind: LossKind, head: LinearHead, Phi, Y, lam: float) -> float:
    """Data term plus lam ||W||_F^2; the intercept is not penalized.

    For MSE the data term is the plain mean squared error (no 1/2), which is
    the objective the ridge closed form minimizes.
    """
    risk = empirical_risk(kind, head.W, Phi, Y, head.bias)
    if kind.name is LossName.MSE:
        risk *= 2.0
    return risk + lam * float(np.sum(head.W * head.W))


def _fit_ridge_head(Phi: np.ndarray, T: np.ndarray, lam: float, fit_intercept: bool) -> LinearHead:
    if fit_intercept:
        phi_mean = Phi.mean(axis=0)
        t_mean = T.mean(axis=0)
        W = ridge_solve(Phi - phi_mean, T - t_mean, lam)
        bias = t_mean - phi_mean @ W
    else:
        W = ridge_solve(Phi, T, lam)
        bias = np.zeros(T.shape[1])
    return LinearHead(W=W, bias=bias)


def fit_top_linear(kind: LossKind, Phi, Y, lam: float, fit_intercept: bool = True,
                   warm_start: LinearHead | None = None) -> LinearHead:
    """Fit the top predictor on a fixed representation.

    MSE uses the ridge closed form. BCE and CCE minimize mean loss +
    lam ||W||^2 with L-BFGS-B, warm-started from ``warm_start`` when its shape
    matches, and record the objective after every accepted iterate.
    """
    Phi = as_matrix(Phi, "Phi", allow_1d=True)
    T = encode_targets(kind, Y)
    if T.shape[0] != Phi.shape[0]:
        raise InvalidInput("Phi and Y must have the same number of rows", component="losses",
                           details={"Phi": Phi.shape, "Y": T.shape})
    if lam < 0:
        raise InvalidInput("lambda must be nonnegative", component="losses", details={"lambda": lam})

    if kind.name is LossName.MSE:
        return _fit_ridge_head(Phi, T, lam, fit_intercept)

    n, D = Phi.shape
    k = T.shape[1]
    n_w = D * k

    def unpack(theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        W = theta[:n_w].reshape(D, k)
        bias = theta[n_w:] if fit_intercept else np.zeros(k)
        return W, bias

    def objective(theta: np.ndarray) -> tuple[float, np.ndarray]:
        W, bias = unpack(theta)
        Z = Phi @ W + bias
        value = float(np.mean(per_sample_loss(kind, Z, T))) + lam * float(np.sum(W * W))
        dL = output_gradient(kind, Z, T) / n
        grad_w = Phi.T @ dL + 2.0 * lam * W
        if fit_intercept:
            return value, np.concatenate([grad_w.ravel(), dL.sum(axis=0)])
        return value, grad_w.ravel()

    theta0 = np.zeros(n_w + (k if fit_intercept else 0))
    if warm_start is not None and warm_start.W.shape == (D, k):
        theta0[:n_w] = warm_start.W.ravel()
        if fit_intercept:
            theta0[n_w:] = warm_start.bias

    trace = [objective(theta0)[0]]

    def gradient_small(theta: np.ndarray) -> bool:
        W, _ = unpack(theta)
        return bool(np.linalg.norm(objective(theta)[1]) <= config.TOP_FIT_GRAD_TOL * (1.0 + np.linalg.norm(W)))

    def record(intermediate_result) -> None:
        trace.append(float(intermediate_result.fun))
        if gradient_small(intermediate_result.x):
            raise StopIteration

    if gradient_small(theta0):
        W, bias = unpack(theta0)
        return LinearHead(W=W.copy(), bias=np.array(bias, dtype=np.float64), objective_trace=tuple(trace),
                          n_iter=0, converged=True)

    # gtol is disabled; the callback applies the relative 2-norm rule
    result = minimize(
        objective,
        theta0,
        jac=True,
        method="L-BFGS-B",
        callback=record,
        options={
            "maxiter": config.TOP_FIT_MAX_ITER,
            "gtol": 0.0,
            "ftol": config.TOP_FIT_FTOL,
        },
    )
    converged = gradient_small(result.x)
    if not converged:
        logger.debug("Top-level fit stopped early", message=str(result.message), n_iter=int(result.nit))

    W, bias = unpack(result.x)
    return LinearHead(
        W=W.copy(),
        bias=np.array(bias, dtype=np.float64),
        objective_trace=tuple(trace),
        n_iter=int(result.nit),
        converged=converged,
    )
