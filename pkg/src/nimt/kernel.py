"""Positive-definite kernels and Gram computations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

RBF = "rbf"
LINEAR = "linear"

Box = Sequence[Tuple[float, float]]


@dataclass(frozen=True)
class Kernel:
    """A kernel K(x, x').

    ``rbf``:    exp(-||(x - x') / rbf_scale||^2), default scale 2.
    ``linear``: <x, x'> + linear_offset.
    """

    kind: str = RBF
    rbf_scale: float = 2.0
    linear_offset: float = 1.0

    def __post_init__(self):
        if self.kind not in (RBF, LINEAR):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if not (self.rbf_scale > 0 and np.isfinite(self.rbf_scale)):
            raise ValueError(f"rbf_scale must be positive, got {self.rbf_scale}")
        if not np.isfinite(self.linear_offset):
            raise ValueError("linear_offset must be finite")


def as_points(pts) -> np.ndarray:
    """Coerce a point or list of points to a float array of shape (n, d).

    Scalars and flat sequences of scalars are read as 1-d points.
    """
    arr = np.asarray(pts, dtype=float)
    if arr.ndim == 0:
        return arr.reshape(1, 1)
    if arr.ndim == 1:
        return arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"points must be at most 2-d, got shape {arr.shape}")
    return arr


def as_point(x) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"a point must be 1-d, got shape {arr.shape}")
    return arr


def kernel_matrix(k: Kernel, X, Y) -> np.ndarray:
    """Cross-kernel matrix ``K[i, j] = K(X[i], Y[j])`` for point arrays."""
    X = as_points(X)
    Y = as_points(Y)
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    if k.kind == RBF:
        diff = (X[:, None, :] - Y[None, :, :]) / k.rbf_scale
        return np.exp(-np.sum(diff * diff, axis=-1))
    # elementwise product then sum keeps K(x, y) == K(y, x) bit for bit
    return np.sum(X[:, None, :] * Y[None, :, :], axis=-1) + k.linear_offset


def eval_kernel(k: Kernel, x, x_prime) -> float:
    x = as_point(x)
    x_prime = as_point(x_prime)
    if x.shape != x_prime.shape:
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs {x_prime.shape[0]}")
    return float(kernel_matrix(k, x[None, :], x_prime[None, :])[0, 0])


def gram_matrix(k: Kernel, pts) -> np.ndarray:
    """Symmetric Gram matrix over ``pts``."""
    P = as_points(pts)
    if P.shape[0] == 0:
        raise ValueError("gram_matrix needs at least one point")
    G = kernel_matrix(k, P, P)
    upper = np.triu(G)
    return upper + np.triu(G, 1).T


def kernel_bound(k: Kernel, domain_box: Optional[Box] = None) -> float:
    """Return M_K, a sup bound of K over the domain.

    The RBF kernel is bounded by 1 everywhere. The linear kernel is only
    bounded on a box, given as one ``(lo, hi)`` pair per dimension.
    """
    if k.kind == RBF:
        return 1.0
    if domain_box is None:
        raise ValueError("linear kernel is unbounded without a domain box")
    total = 0.0
    for lo, hi in domain_box:
        if hi < lo:
            raise ValueError(f"empty box interval ({lo}, {hi})")
        # max of x_i * x'_i over the interval is attained at equal endpoints
        total += max(lo * lo, hi * hi)
    return total + k.linear_offset


def bounding_box(pts) -> list:
    P = as_points(pts)
    return [(float(lo), float(hi)) for lo, hi in zip(P.min(axis=0), P.max(axis=0))]
