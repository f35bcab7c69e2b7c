"""Seeded built-in datasets for the benchmark harness and tests."""

from __future__ import annotations

import numpy as np

from .complexes import (
    FilteredCliqueComplex,
    FilteredCubicalComplex,
    euclidean_metric,
    torus_metric,
)
from .errors import UsageError


def er_complex(n: int, seed: int = 0, max_dim: int = 2) -> FilteredCliqueComplex:
    """Complete graph on n vertices with iid uniform edge weights."""
    rng = np.random.default_rng(seed)
    w = rng.random((n, n))
    d = np.triu(w, 1)
    d = d + d.T
    return FilteredCliqueComplex(d, max_dim=max_dim, threshold=1.0)


def uniform_complex(n: int, dim: int = 3, seed: int = 0, max_dim: int = 2,
                    threshold: float | None = None) -> FilteredCliqueComplex:
    """n points sampled uniformly from the unit cube in the given ambient
    dimension, Euclidean metric."""
    rng = np.random.default_rng(seed)
    pts = rng.random((n, dim))
    d = euclidean_metric(pts)
    if threshold is None:
        threshold = float(d.max())
    return FilteredCliqueComplex(d, max_dim=max_dim, threshold=threshold)


def torus_complex(n: int, seed: int = 0, max_dim: int = 2,
                  threshold: float | None = None) -> FilteredCliqueComplex:
    """n points in the unit cube under the quotient (flat torus) metric."""
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 3))
    d = torus_metric(pts)
    if threshold is None:
        threshold = float(d.max())
    return FilteredCliqueComplex(d, max_dim=max_dim, threshold=threshold)


def circle_complex(n: int, max_dim: int = 2, threshold: float = 2.0,
                   seed: int = 0) -> FilteredCliqueComplex:
    """n points evenly spaced on the unit circle (the seed is accepted for
    interface uniformity; the construction is deterministic)."""
    angles = 2.0 * np.pi * np.arange(n) / n
    pts = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    d = euclidean_metric(pts)
    return FilteredCliqueComplex(d, max_dim=max_dim, threshold=threshold)


def _smoothed_noise(shape: tuple[int, ...], seed: int, passes: int = 2) -> np.ndarray:
    """Separable moving-average of white noise: a structured random scalar
    field standing in for an exact-covariance random field."""
    rng = np.random.default_rng(seed)
    arr = rng.standard_normal(shape)
    for _ in range(passes):
        for ax in range(arr.ndim):
            fwd = np.roll(arr, 1, axis=ax)
            bak = np.roll(arr, -1, axis=ax)
            arr = (fwd + arr + bak) / 3.0
    return arr


def grf2d_complex(side: int, seed: int = 0) -> FilteredCubicalComplex:
    return FilteredCubicalComplex(_smoothed_noise((side, side), seed))


def grf3d_complex(side: int, seed: int = 0) -> FilteredCubicalComplex:
    return FilteredCubicalComplex(_smoothed_noise((side, side, side), seed))


def build_dataset(name: str, seed: int = 0, **kwargs):
    """Instantiate a named dataset; unknown names raise a usage error."""
    if name == "er":
        return er_complex(kwargs.get("n", 25), seed=seed, max_dim=kwargs.get("max_dim", 2))
    if name == "uniform":
        return uniform_complex(kwargs.get("n", 30), dim=kwargs.get("dim", 3),
                               seed=seed, max_dim=kwargs.get("max_dim", 2),
                               threshold=kwargs.get("threshold"))
    if name == "torus":
        return torus_complex(kwargs.get("n", 30), seed=seed,
                             max_dim=kwargs.get("max_dim", 2),
                             threshold=kwargs.get("threshold"))
    if name == "circle":
        return circle_complex(kwargs.get("n", 20), max_dim=kwargs.get("max_dim", 2),
                              threshold=kwargs.get("threshold", 2.0), seed=seed)
    if name == "grf2d":
        return grf2d_complex(kwargs.get("side", 8), seed=seed)
    if name == "grf3d":
        return grf3d_complex(kwargs.get("side", 4), seed=seed)
    raise UsageError(f"unknown dataset {name!r}")
