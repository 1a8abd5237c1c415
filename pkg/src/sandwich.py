"""Closed-form solvers for sandwiched least squares.

Each solver minimizes

    J(A) = (1/n) sum_i ||r_i - W^T A z_i||^2 + lambda ||A||^2

for a scalar, diagonal or dense A, with one lambda convention (n * lambda on
the normal equations) shared by all three structures.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from src.config import config
from src.exceptions import DegenerateProblem, InvalidInput
from src.numeric_kernels import as_matrix, solve_spd, sym_eig


class SandwichStructure(str, Enum):
    """Shape of the linear map A inside a residual block."""
    SCALAR = "scalar"
    DIAGONAL = "diagonal"
    DENSE = "dense"


@dataclass(frozen=True)
class SandwichProblem:
    """Residuals R (n x d), top predictor W (D x d), features Z (n x p), ridge weight."""

    R: np.ndarray
    W: np.ndarray
    Z: np.ndarray
    lam: float

    def __post_init__(self):
        R = as_matrix(self.R, "R", allow_1d=True)
        W = as_matrix(self.W, "W", allow_1d=True)
        Z = as_matrix(self.Z, "Z", allow_1d=True)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "Z", Z)
        if R.shape[0] < 1:
            raise InvalidInput("Sandwich problem needs n >= 1", component="sandwich")
        if Z.shape[0] != R.shape[0] or W.shape[1] != R.shape[1]:
            raise InvalidInput(
                "Inconsistent sandwich dimensions",
                component="sandwich",
                details={"R": R.shape, "W": W.shape, "Z": Z.shape},
            )
        if self.lam < 0:
            raise InvalidInput("lambda must be nonnegative", component="sandwich",
                               details={"lambda": self.lam})

    @property
    def n(self) -> int:
        return self.R.shape[0]

    @property
    def D(self) -> int:
        return self.W.shape[0]

    @property
    def p(self) -> int:
        return self.Z.shape[1]

    def require_square(self, structure: SandwichStructure) -> None:
        if self.p != self.D:
            raise InvalidInput(
                f"{structure.value} structure requires p == D",
                component="sandwich",
                details={"p": self.p, "D": self.D},
            )


def sandwich_scalar(problem: SandwichProblem) -> float:
    """A = <R, ZW>_F / (||ZW||_F^2 + n lambda)."""
    problem.require_square(SandwichStructure.SCALAR)
    ZW = problem.Z @ problem.W
    denom = float(np.sum(ZW * ZW)) + problem.n * problem.lam
    if denom <= 0.0:
        raise DegenerateProblem(
            "Projected features ZW vanish and lambda = 0",
            component="sandwich",
            details={"n": problem.n, "D": problem.D},
        )
    return float(np.sum(problem.R * ZW)) / denom


def sandwich_diag(problem: SandwichProblem) -> np.ndarray:
    """Solve (W W^T o Z^T Z / n + lambda I) a = diag(W R^T Z) / n."""
    problem.require_square(SandwichStructure.DIAGONAL)
    n = problem.n
    W, Z, R = problem.W, problem.Z, problem.R
    b = np.mean((R @ W.T) * Z, axis=0)
    C = (W @ W.T) * (Z.T @ Z) / n
    C[np.diag_indices_from(C)] += problem.lam
    return solve_spd(C, b)


def _dense_spectral(problem: SandwichProblem, min_norm: bool) -> np.ndarray:
    W, Z, R = problem.W, problem.Z, problem.R
    eig_w = sym_eig(W @ W.T)
    eig_z = sym_eig(Z.T @ Z)
    U, V = eig_w.eigenvectors, eig_z.eigenvectors
    numer = U.T @ W @ R.T @ Z @ V
    denom = problem.n * problem.lam + np.outer(eig_w.eigenvalues, eig_z.eigenvalues)
    if min_norm:
        # zero denominators pair with zero numerators; dropping them gives the
        # minimum-norm least-squares solution
        cutoff = config.ABS_TOL * max(float(np.max(np.abs(denom))), 1.0)
        keep = np.abs(denom) > cutoff
        scaled = np.zeros_like(numer)
        scaled[keep] = numer[keep] / denom[keep]
    else:
        scaled = numer / denom
    return U @ scaled @ V.T


def sandwich_dense(problem: SandwichProblem) -> np.ndarray:
    """Dense D x p solution via the spectral decompositions of W W^T and Z^T Z.

    Satisfies W R^T Z = W W^T A Z^T Z + lambda n A.
    """
    if problem.lam <= 0:
        raise InvalidInput(
            "sandwich_dense requires lambda > 0",
            component="sandwich",
            details={"lambda": problem.lam},
        )
    return _dense_spectral(problem, min_norm=False)


def sandwich_dense_min_norm(problem: SandwichProblem) -> np.ndarray:
    """Dense solve that also accepts lambda = 0 (minimum-norm minimizer)."""
    return _dense_spectral(problem, min_norm=problem.lam == 0)


def solve_sandwich(problem: SandwichProblem, structure: SandwichStructure) -> float | np.ndarray:
    """Dispatch to the closed form for ``structure``."""
    structure = SandwichStructure(structure)
    if structure is SandwichStructure.SCALAR:
        return sandwich_scalar(problem)
    if structure is SandwichStructure.DIAGONAL:
        return sandwich_diag(problem)
    return sandwich_dense_min_norm(problem)


def embed(solution, structure: SandwichStructure, D: int, p: int) -> np.ndarray:
    """Express a scalar/diagonal/dense solution as a dense D x p matrix."""
    structure = SandwichStructure(structure)
    if structure is SandwichStructure.SCALAR:
        return float(solution) * np.eye(D, p)
    if structure is SandwichStructure.DIAGONAL:
        return np.diag(np.asarray(solution, dtype=np.float64))
    return np.asarray(solution, dtype=np.float64).reshape(D, p)


def apply_map(solution, structure: SandwichStructure, F: np.ndarray) -> np.ndarray:
    """Rows A f_i for a feature matrix F (n x p); returns n x D."""
    structure = SandwichStructure(structure)
    if structure is SandwichStructure.SCALAR:
        return float(solution) * F
    if structure is SandwichStructure.DIAGONAL:
        return F * np.asarray(solution, dtype=np.float64)
    return F @ np.asarray(solution, dtype=np.float64).T
