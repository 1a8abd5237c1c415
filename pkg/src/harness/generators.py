"""Synthetic datasets for experiments, tests and the bundled CSV files."""

from __future__ import annotations

import numpy as np
from sklearn.datasets import make_blobs as sk_make_blobs

from src.config import config
from src.exceptions import InvalidInput
from src.harness.data import Dataset, from_arrays


def make_concentric_circles(
    n: int = config.POINTCLOUD_N,
    rings: int = config.POINTCLOUD_RINGS,
    classes: int = config.POINTCLOUD_CLASSES,
    noise_sd: float = config.POINTCLOUD_NOISE_SD,
    seed: int = 0,
) -> Dataset:
    """Points on ``rings`` concentric circles in the plane.

    Ring j has radius (j + 1) / rings and class j mod classes. Rings are
    assigned round-robin (counts differ by at most one) and the rows are then
    shuffled. Each point is radius * (cos t, sin t) with t uniform, plus
    Normal(0, noise_sd^2) noise on both coordinates.
    """
    if classes < 2 or rings < classes:
        raise InvalidInput("Need rings >= classes >= 2", component="generators",
                           details={"rings": rings, "classes": classes})
    if n < 1 or noise_sd < 0:
        raise InvalidInput("Need n >= 1 and noise_sd >= 0", component="generators",
                           details={"n": n, "noise_sd": noise_sd})
    rng = np.random.default_rng(seed)
    ring = rng.permutation(np.arange(n) % rings)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=n)
    radius = (ring + 1) / rings
    X = np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])
    if noise_sd > 0:
        X = X + rng.normal(0.0, noise_sd, size=X.shape)
    return from_arrays(X, ring % classes, task="classification", n_classes=classes,
                       source="concentric_circles")


def make_sine_toy(n: int = 256, seed: int = 0, noise_sd: float = 0.0) -> Dataset:
    """y = sin(4x) with x uniform on [-1, 1]."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=n)
    y = np.sin(4.0 * x)
    if noise_sd > 0:
        y = y + rng.normal(0.0, noise_sd, size=n)
    return from_arrays(x.reshape(-1, 1), y, source="sine_toy")


def make_blobs(n: int = 200, seed: int = 0, n_classes: int = 2, n_features: int = 2,
               cluster_std: float = 0.5) -> Dataset:
    """Well separated Gaussian blobs, one per class, centres on a wide grid."""
    centers = 4.0 * np.eye(n_classes, n_features) if n_classes <= n_features else None
    X, y = sk_make_blobs(
        n_samples=n,
        n_features=n_features,
        centers=centers if centers is not None else n_classes,
        cluster_std=cluster_std,
        center_box=(-8.0, 8.0),
        random_state=seed,
    )
    return from_arrays(X, y, task="classification", n_classes=n_classes, source="blobs")
