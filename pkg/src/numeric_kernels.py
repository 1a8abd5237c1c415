"""Dense linear-algebra primitives shared by the solvers.

Matrices are plain float64 numpy arrays. Everything here is a pure function
of its inputs and safe to call concurrently.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from src.config import config
from src.exceptions import InvalidInput, SingularSystem


def as_matrix(data, name: str = "matrix", allow_1d: bool = False) -> np.ndarray:
    """Coerce ``data`` to a finite float64 2-D array.

    A 1-D input is promoted to a column when ``allow_1d`` is set.
    """
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 1 and allow_1d:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise InvalidInput(
            f"{name} must be 2-D",
            component="numeric_kernels",
            details={"ndim": arr.ndim, "shape": arr.shape},
        )
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(
            f"{name} contains NaN or Inf entries",
            component="numeric_kernels",
            details={"shape": arr.shape},
        )
    return np.ascontiguousarray(arr)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenpairs of a symmetric matrix, eigenvalues ascending."""

    eigenvectors: np.ndarray
    eigenvalues: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        """U diag(lambda) U^T."""
        U = self.eigenvectors
        return (U * self.eigenvalues) @ U.T


def sym_eig(S) -> SpectralDecomposition:
    """Symmetric eigendecomposition via LAPACK ``syevr``.

    The input is symmetrized as (S + S^T)/2 before factorization.
    """
    S = as_matrix(S, "S")
    if S.shape[0] != S.shape[1]:
        raise InvalidInput(
            "sym_eig requires a square matrix",
            component="numeric_kernels",
            details={"shape": S.shape},
        )
    scale = max(np.linalg.norm(S), config.ABS_TOL)
    asym = np.linalg.norm(S - S.T) / scale
    if asym > config.SYMMETRY_RTOL:
        raise InvalidInput(
            "sym_eig input is not symmetric",
            component="numeric_kernels",
            details={"relative_asymmetry": float(asym)},
        )
    eigenvalues, eigenvectors = la.eigh(0.5 * (S + S.T))
    return SpectralDecomposition(eigenvectors=eigenvectors, eigenvalues=eigenvalues)


def solve_spd(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve a symmetric positive (semi)definite system.

    An exactly or numerically singular ``lhs`` raises SingularSystem.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("error", la.LinAlgWarning)
        try:
            return la.solve(lhs, rhs, assume_a="sym")
        except (la.LinAlgError, la.LinAlgWarning) as e:
            raise SingularSystem(
                "Normal equations are singular",
                component="numeric_kernels",
                details={"dim": lhs.shape[0], "reason": str(e)},
            ) from e


def ridge_solve(F, T, lam: float) -> np.ndarray:
    """Ridge least squares with the n*lambda convention.

    Returns argmin_M (1/n)||T - F M||_F^2 + lam ||M||_F^2, i.e. the solution of
    (F^T F + n lam I) M = F^T T.
    """
    F = as_matrix(F, "F", allow_1d=True)
    T = as_matrix(T, "T", allow_1d=True)
    n, p = F.shape
    if T.shape[0] != n:
        raise InvalidInput(
            "F and T must have the same number of rows",
            component="numeric_kernels",
            details={"F_rows": n, "T_rows": T.shape[0]},
        )
    if n < 1:
        raise InvalidInput("ridge_solve needs at least one row", component="numeric_kernels")
    if lam < 0:
        raise InvalidInput("lambda must be nonnegative", component="numeric_kernels",
                           details={"lambda": lam})

    gram = F.T @ F
    if lam > 0:
        gram[np.diag_indices_from(gram)] += n * lam
    return solve_spd(gram, F.T @ T)


def sandwich_objective(R, W, Z, A, lam: float) -> float:
    """J(A) = (1/n)||R - Z A^T W||_F^2 + lam ||A||_F^2 for a dense D x p matrix A."""
    R = np.asarray(R, dtype=np.float64)
    Z = np.asarray(Z, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    A = np.asarray(A, dtype=np.float64)
    n = R.shape[0]
    resid = R - Z @ A.T @ W
    return float(np.sum(resid * resid) / n + lam * np.sum(A * A))


def kron_sandwich_oracle(R, W, Z, lam: float) -> np.ndarray:
    """Brute-force dense sandwich solve through the vectorized normal equations.

    Forms the (D p) x (D p) system explicitly from vec(Z A^T W) =
    (W^T kron Z) vec(A^T). Cubic in D*p; intended as a test oracle only.
    """
    R = as_matrix(R, "R", allow_1d=True)
    W = as_matrix(W, "W", allow_1d=True)
    Z = as_matrix(Z, "Z", allow_1d=True)
    n, d = R.shape
    D = W.shape[0]
    p = Z.shape[1]
    if W.shape[1] != d or Z.shape[0] != n:
        raise InvalidInput(
            "Inconsistent sandwich dimensions",
            component="numeric_kernels",
            details={"R": R.shape, "W": W.shape, "Z": Z.shape},
        )
    if D * p > config.ORACLE_MAX_UNKNOWNS:
        raise InvalidInput(
            "Kronecker oracle is limited to small problems",
            component="numeric_kernels",
            details={"unknowns": D * p, "limit": config.ORACLE_MAX_UNKNOWNS},
        )

    design = np.kron(W.T, Z)
    target = R.flatten(order="F")
    lhs = design.T @ design
    lhs[np.diag_indices_from(lhs)] += n * lam
    rhs = design.T @ target
    if lam > 0:
        x = la.solve(lhs, rhs, assume_a="pos")
    else:
        x = la.lstsq(design, target)[0]
    # x = vec(A^T) column-major, so a row-major reshape gives A
    return x.reshape(D, p)
