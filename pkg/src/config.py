"""Centralized configuration for the RFRBoost toolkit."""

from dataclasses import dataclass


@dataclass
class AppConfig:
    """Application-wide numeric constants and defaults."""

    # Dense linear algebra
    EIG_RECONSTRUCTION_RTOL: float = 1e-10
    SYMMETRY_RTOL: float = 1e-6  # above this, sym_eig refuses to symmetrize
    ABS_TOL: float = 1e-12  # for quantities that can be exactly zero
    ORACLE_MAX_UNKNOWNS: int = 256  # D*p cap for the Kronecker oracle

    # Top-level convex fit (BCE/CCE)
    TOP_FIT_MAX_ITER: int = 500
    TOP_FIT_GRAD_TOL: float = 1e-7  # stop when ||grad|| <= tol * (1 + ||W||)
    TOP_FIT_FTOL: float = 1e-15

    # Line search
    LINE_SEARCH_ALPHA_MAX: float = 64.0
    LINE_SEARCH_TOL: float = 1e-10
    LINE_SEARCH_MAX_ITER: int = 100
    NEWTON_CURVATURE_FLOOR: float = 1e-14

    # Random features
    SWIM_EPS: float = 1e-6
    DEFAULT_FEATURE_DIM: int = 512
    DEFAULT_FEATURE_SCALE: float = 1.0
    FEATURE_NORM_FLOOR: float = 1e-12  # std below this is treated as zero

    # Boosting
    DEFAULT_N_LAYERS: int = 3
    DEFAULT_BOOST_LR: float = 1.0
    DEFAULT_L2_LINPRED: float = 1e-4
    DEFAULT_L2_GHAT: float = 1e-4
    MAX_DEFAULT_HIDDEN_DIM: int = 128  # D = min(q, 128) for random-projection Phi_0

    # Evaluation harness
    DEFAULT_FOLDS: int = 5
    DEFAULT_INNER_FOLDS: int = 5
    PARALLEL_MAX_WORKERS: int = 4

    # Point-cloud experiment
    POINTCLOUD_N: int = 10_000
    POINTCLOUD_RINGS: int = 9
    POINTCLOUD_CLASSES: int = 3
    POINTCLOUD_NOISE_SD: float = 0.01
    POINTCLOUD_HIDDEN_DIM: int = 2
    POINTCLOUD_N_LAYERS: int = 3
    POINTCLOUD_L2_CLS_GRID: tuple[float, ...] = (1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5)
    POINTCLOUD_L2_LOGISTIC_GRID: tuple[float, ...] = (1.0, 1e-1, 1e-2, 1e-3, 1e-4)

    # Serialization
    MODEL_SCHEMA: str = "rfrboost.model"
    MODEL_SCHEMA_VERSION: int = 1


# Global config instance
config = AppConfig()
