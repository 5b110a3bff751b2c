"""RKHS models as a base function plus a finite kernel expansion.

A model is ``f(x) = base(x) + sum_i coeff_i * K(center_i, x)``. Learner
updates only ever append (or merge into) expansion terms, so the change
caused by an update is exactly the added kernel sections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .kernel import Kernel, as_point, as_points, kernel_matrix

_SQRT_2PI = math.sqrt(2.0 * math.pi)


class BaseFunction:
    """Analytic or tabulated part of a model. Subclasses are vectorized."""

    dim: Optional[int] = None

    def __call__(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _check(self, X: np.ndarray) -> np.ndarray:
        X = as_points(X)
        if self.dim is not None and X.shape[1] != self.dim:
            raise ValueError(
                f"{type(self).__name__} expects {self.dim}-d points, got {X.shape[1]}-d"
            )
        return X


@dataclass(frozen=True)
class Zero(BaseFunction):
    dim: Optional[int] = None

    def __call__(self, X):
        X = self._check(X)
        return np.zeros(X.shape[0])


@dataclass(frozen=True)
class GaussianMixture1D(BaseFunction):
    """Density of a 1-d Gaussian mixture."""

    weights: Tuple[float, ...]
    means: Tuple[float, ...]
    stddevs: Tuple[float, ...]
    dim: int = field(default=1, init=False)

    def __post_init__(self):
        n = len(self.weights)
        if n == 0 or len(self.means) != n or len(self.stddevs) != n:
            raise ValueError("weights, means and stddevs must have equal nonzero length")
        if any(not (s > 0) for s in self.stddevs):
            raise ValueError(f"stddevs must be positive, got {self.stddevs}")
        if any(w < 0 for w in self.weights) or abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError(f"weights must be nonnegative and sum to 1, got {self.weights}")

    def __call__(self, X):
        x = self._check(X)[:, 0]
        out = np.zeros_like(x)
        for w, mu, sd in zip(self.weights, self.means, self.stddevs):
            z = (x - mu) / sd
            out += w * np.exp(-0.5 * z * z) / (sd * _SQRT_2PI)
        return out


@dataclass(frozen=True)
class Boundary2D(BaseFunction):
    """``x2 + sign * (bump(x1; c_a, w_a) - bump(x1; c_b, w_b))``.

    ``bump(x; c, w) = exp(-((x - c) / w)^2)``. The zero level set is the
    curve ``x2 = -sign * (bump_a - bump_b)``.
    """

    sign: float
    centers: Tuple[float, float]
    widths: Tuple[float, float] = (0.5, 0.5)
    dim: int = field(default=2, init=False)

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        if len(self.centers) != 2 or len(self.widths) != 2:
            raise ValueError("Boundary2D needs exactly two centers and two widths")
        if any(not (w > 0) for w in self.widths):
            raise ValueError(f"widths must be positive, got {self.widths}")

    def bump_difference(self, x1):
        (ca, cb), (wa, wb) = self.centers, self.widths
        return np.exp(-(((x1 - ca) / wa) ** 2)) - np.exp(-(((x1 - cb) / wb) ** 2))

    def __call__(self, X):
        X = self._check(X)
        return X[:, 1] + self.sign * self.bump_difference(X[:, 0])


@dataclass(frozen=True)
class Plane(BaseFunction):
    """Affine function; the last coefficient is the intercept."""

    coefficients: Tuple[float, ...]

    def __post_init__(self):
        if len(self.coefficients) < 2:
            raise ValueError("Plane needs at least one slope and an intercept")
        if not all(np.isfinite(self.coefficients)):
            raise ValueError("Plane coefficients must be finite")

    @property
    def dim(self):
        return len(self.coefficients) - 1

    def __call__(self, X):
        X = self._check(X)
        w = np.asarray(self.coefficients, dtype=float)
        return X @ w[:-1] + w[-1]


@dataclass(frozen=True)
class Paraboloid(BaseFunction):
    """``sign * ||x - center||^2``."""

    sign: float
    center: Tuple[float, ...]

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        if len(self.center) == 0:
            raise ValueError("Paraboloid needs a center")

    @property
    def dim(self):
        return len(self.center)

    def __call__(self, X):
        X = self._check(X)
        d = X - np.asarray(self.center, dtype=float)
        return self.sign * np.sum(d * d, axis=1)


class GridFunction:
    """Gray levels on a pixel lattice, pixel centers mapped into [0, 1]^2.

    Pixel ``(r, c)`` of a ``rows x cols`` image sits at
    ``((r + 0.5) / rows, (c + 0.5) / cols)``.
    """

    def __init__(self, values):
        values = np.array(values, dtype=float)
        if values.ndim != 2 or values.size == 0:
            raise ValueError(f"grid values must be a nonempty 2-d array, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid values must be finite")
        if values.min() < 0.0 or values.max() > 1.0:
            raise ValueError("grid values must lie in [0, 1]")
        values.setflags(write=False)
        self.values = values

    @property
    def shape(self):
        return self.values.shape

    def points(self) -> np.ndarray:
        rows, cols = self.shape
        r = (np.arange(rows) + 0.5) / rows
        c = (np.arange(cols) + 0.5) / cols
        rr, cc = np.meshgrid(r, c, indexing="ij")
        return np.column_stack([rr.ravel(), cc.ravel()])

    def lookup(self, X) -> np.ndarray:
        X = as_points(X)
        rows, cols = self.shape
        r = np.clip(np.rint(X[:, 0] * rows - 0.5), 0, rows - 1).astype(int)
        c = np.clip(np.rint(X[:, 1] * cols - 0.5), 0, cols - 1).astype(int)
        return self.values[r, c]

    def __eq__(self, other):
        return isinstance(other, GridFunction) and np.array_equal(self.values, other.values)

    def __repr__(self):
        return f"GridFunction(shape={self.shape})"


@dataclass(frozen=True, eq=False)
class Grid(BaseFunction):
    grid: GridFunction
    dim: int = field(default=2, init=False)

    def __call__(self, X):
        return self.grid.lookup(self._check(X))


class Samples(BaseFunction):
    """Function known only at sample points, nearest-sample lookup elsewhere."""

    def __init__(self, points, values):
        P = as_points(points)
        v = np.asarray(values, dtype=float).ravel()
        if P.shape[0] == 0 or P.shape[0] != v.shape[0]:
            raise ValueError("Samples needs one value per point")
        if not np.all(np.isfinite(v)):
            raise ValueError("sample values must be finite")
        self.points = P
        self.values = v
        self.dim = P.shape[1]
        self._tree = cKDTree(P)

    def __call__(self, X):
        X = self._check(X)
        _, idx = self._tree.query(X)
        return self.values[idx]


class RkhsFunction:
    """Immutable model ``base + sum_i coeff_i K(center_i, .)``.

    Terms with identical centers are merged by adding coefficients.
    """

    def __init__(self, base: BaseFunction, kernel: Kernel, centers=None, coeffs=None):
        self.base = base
        self.kernel = kernel
        if centers is None:
            dim = base.dim if base.dim is not None else 1
            centers = np.empty((0, dim))
            coeffs = np.empty(0)
        coeffs = np.array(coeffs, dtype=float).ravel()
        centers = np.array(centers, dtype=float)
        if coeffs.size == 0:
            centers = centers.reshape(0, centers.shape[-1] if centers.ndim == 2 else 1)
        else:
            centers = centers.reshape(coeffs.size, -1)
        centers.setflags(write=False)
        coeffs.setflags(write=False)
        self.centers = centers
        self.coeffs = coeffs
        self._index: Dict[bytes, int] = {c.tobytes(): i for i, c in enumerate(centers)}

    @property
    def n_terms(self) -> int:
        return self.coeffs.shape[0]

    def terms(self):
        return [(c.copy(), float(a)) for c, a in zip(self.centers, self.coeffs)]

    def evaluate_many(self, X) -> np.ndarray:
        X = as_points(X)
        if self.base.dim is not None and X.shape[1] != self.base.dim:
            raise ValueError(f"dimension mismatch: model is {self.base.dim}-d, got {X.shape[1]}-d")
        out = self.base(X)
        if self.n_terms:
            if X.shape[1] != self.centers.shape[1]:
                raise ValueError(
                    f"dimension mismatch: model is {self.centers.shape[1]}-d, got {X.shape[1]}-d"
                )
            out = out + kernel_matrix(self.kernel, X, self.centers) @ self.coeffs
        return out

    def __call__(self, x) -> float:
        return evaluate(self, x)

    def add_terms(self, centers, coeffs) -> "RkhsFunction":
        """Return a new model with the given terms added (duplicates merged)."""
        coeffs = np.asarray(coeffs, dtype=float).ravel()
        if coeffs.size == 0:
            return self
        centers = as_points(centers).reshape(coeffs.shape[0], -1)
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("expansion coefficients must be finite")
        if not np.all(np.isfinite(centers)):
            raise ValueError("expansion centers must be finite")
        if self.n_terms and centers.shape[1] != self.centers.shape[1]:
            raise ValueError(
                f"dimension mismatch: model is {self.centers.shape[1]}-d, got {centers.shape[1]}-d"
            )
        if self.base.dim is not None and centers.shape[1] != self.base.dim:
            raise ValueError(f"dimension mismatch: model is {self.base.dim}-d, got {centers.shape[1]}-d")
        new_coeffs = list(self.coeffs)
        new_centers = list(self.centers) if self.n_terms else []
        index = dict(self._index)
        for c, a in zip(centers, coeffs):
            key = c.tobytes()
            if key in index:
                new_coeffs[index[key]] += a
            else:
                index[key] = len(new_coeffs)
                new_centers.append(c)
                new_coeffs.append(a)
        if not new_centers:
            return self
        return RkhsFunction(self.base, self.kernel, np.array(new_centers), np.array(new_coeffs))

    def __repr__(self):
        return f"RkhsFunction(base={self.base!r}, kernel={self.kernel!r}, n_terms={self.n_terms})"


def evaluate(f: RkhsFunction, x) -> float:
    """Evaluation functional E_x[f] = f(x)."""
    return float(f.evaluate_many(as_point(x)[None, :])[0])


def add_expansion_term(f: RkhsFunction, center, coeff: float) -> RkhsFunction:
    if not np.isfinite(coeff):
        raise ValueError(f"coefficient must be finite, got {coeff}")
    return f.add_terms(as_point(center)[None, :], [coeff])


def empirical_l2(f_values: Sequence[float], g_values: Sequence[float]) -> float:
    """Empirical discrepancy ``(1/n) * sqrt(sum_i (f_i - g_i)^2)``."""
    f = np.asarray(f_values, dtype=float).ravel()
    g = np.asarray(g_values, dtype=float).ravel()
    if f.shape != g.shape:
        raise ValueError(f"length mismatch: {f.shape[0]} vs {g.shape[0]}")
    if f.shape[0] == 0:
        raise ValueError("empirical_l2 needs at least one value")
    d = f - g
    return float(math.sqrt(float(np.dot(d, d))) / d.shape[0])


def make_target(base: BaseFunction, kernel: Optional[Kernel] = None) -> RkhsFunction:
    """Wrap a base function as a model with an empty expansion."""
    if not isinstance(base, BaseFunction):
        raise ValueError(f"expected a BaseFunction, got {type(base).__name__}")
    return RkhsFunction(base, kernel if kernel is not None else Kernel())
