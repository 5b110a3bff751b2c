"""Scenario builders for the teaching experiments."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from importlib import resources
from typing import Dict, List, Optional

import numpy as np

from .function_space import (
    Boundary2D,
    GaussianMixture1D,
    Grid,
    GridFunction,
    Paraboloid,
    Plane,
    RkhsFunction,
    Samples,
    Zero,
    make_target,
)
from .kernel import LINEAR, Kernel, as_point, as_points
from .learner import MEAN, LearnerState, TeachingPack, learner_step
from .loss import HINGE, SQUARE, LossKind
from .teacher import GFT, SessionLog, TeacherPolicy, gft_select, run_session

SCENARIOS = ("gmm1d", "cls2d", "image", "linear_compare", "parametric3d")

DEFAULT_POOL_RATIO = 0.8
DEFAULT_ALT_PROB = 0.2


@dataclass(eq=False)
class Scenario:
    name: str
    target: RkhsFunction
    init: RkhsFunction
    grid: np.ndarray
    loss: LossKind
    eta: float
    epsilon: float
    max_iters: int
    aggregation: str = MEAN
    pool_ratio: float = DEFAULT_POOL_RATIO
    alt_prob: float = DEFAULT_ALT_PROB
    alt: Optional[RkhsFunction] = None

    def __post_init__(self):
        self.grid = as_points(self.grid)
        if self.grid.shape[0] == 0:
            raise ValueError("scenario grid must not be empty")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if self.max_iters < 0:
            raise ValueError(f"max_iters must be nonnegative, got {self.max_iters}")

    @property
    def kernel(self) -> Kernel:
        return self.init.kernel


def build_grid(start: float, stop: float, step: float, dims: int = 1) -> np.ndarray:
    """Half-open lattice ``start + i * step`` per axis, row-major product."""
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    if not stop > start:
        raise ValueError(f"stop must exceed start, got [{start}, {stop})")
    if dims < 1:
        raise ValueError(f"dims must be >= 1, got {dims}")
    count = max(1, math.ceil((stop - start) / step - 1e-9))
    axis = start + np.arange(count) * step
    if dims == 1:
        return axis.reshape(-1, 1)
    return np.array(list(itertools.product(axis, repeat=dims)))


# -- synthetic images --------------------------------------------------------

def _ring(rows, cols, center, radius, width, aspect=1.0):
    r = np.arange(rows)[:, None] + 0.5
    c = np.arange(cols)[None, :] + 0.5
    dist = np.sqrt(((r - center[0]) / aspect) ** 2 + (c - center[1]) ** 2)
    return np.exp(-(((dist - radius) / width) ** 2))


def synthetic_image(name: str, size: int = 28) -> np.ndarray:
    """Gray levels in [0, 1] for the bundled images.

    ``ring`` is a single circle, ``eight`` two stacked circles and ``oval``
    a vertically stretched ring standing in for a letter O.
    """
    s = float(size)
    mid = s / 2.0
    if name == "ring":
        img = _ring(size, size, (mid, mid), 0.32 * s, 0.07 * s)
    elif name == "eight":
        top = _ring(size, size, (mid - 0.2 * s, mid), 0.17 * s, 0.06 * s)
        bottom = _ring(size, size, (mid + 0.2 * s, mid), 0.19 * s, 0.06 * s)
        img = np.maximum(top, bottom)
    elif name == "oval":
        img = _ring(size, size, (mid, mid), 0.27 * s, 0.07 * s, aspect=1.35)
    else:
        raise ValueError(f"unknown synthetic image {name!r}")
    return np.clip(img, 0.0, 1.0)


def bundled_image_path(name: str):
    return resources.files("nimt") / "data" / f"{name}.pgm"


def load_bundled_image(name: str) -> GridFunction:
    from .images import load_grayscale_image

    with resources.as_file(bundled_image_path(name)) as p:
        return load_grayscale_image(p)


def image_kernel(shape) -> Kernel:
    """RBF whose width on [0, 1]^2 equals scale 2 measured in raw pixels."""
    return Kernel(rbf_scale=2.0 / max(shape))


# -- scenarios ---------------------------------------------------------------

def _gmm1d(o):
    kernel = o.pop("kernel", None) or Kernel()
    target = make_target(GaussianMixture1D((1 / 3, 2 / 3), (-2.0, 2.0), (1.0, 1.0)), kernel)
    init = make_target(GaussianMixture1D((1.0,), (-10.0,), (1.0,)), kernel)
    return dict(target=target, init=init, grid=build_grid(-14, 14, 0.1), loss=LossKind(SQUARE))


def _cls2d(o):
    kernel = o.pop("kernel", None) or Kernel()
    target = make_target(Boundary2D(-1, (0.5, -0.5), (0.5, 0.5)), kernel)
    init = make_target(Boundary2D(1, (0.3, -0.6), (0.5, 0.5)), kernel)
    return dict(target=target, init=init, grid=build_grid(-1, 1, 0.01, 2), loss=LossKind(HINGE))


def _image(o):
    target_img = o.pop("target_image", None)
    init_img = o.pop("init_image", "eight")
    alt_img = o.pop("alt_image", None)

    def grid_of(img):
        if img is None or img == "blank":
            return None
        if isinstance(img, GridFunction):
            return img
        if isinstance(img, str) and img in ("ring", "eight", "oval"):
            return load_bundled_image(img)
        from .images import load_grayscale_image

        return load_grayscale_image(img)

    tg = grid_of(target_img if target_img is not None else "ring")
    ig = grid_of(init_img)
    ag = grid_of(alt_img)
    for other in (ig, ag):
        if other is not None and other.shape != tg.shape:
            raise ValueError(f"image shapes differ: {other.shape} vs target {tg.shape}")
    kernel = o.pop("kernel", None) or image_kernel(tg.shape)
    init_base = Grid(ig) if ig is not None else Zero(2)
    return dict(
        target=make_target(Grid(tg), kernel),
        init=make_target(init_base, kernel),
        alt=make_target(Grid(ag), kernel) if ag is not None else None,
        grid=tg.points(),
        loss=LossKind(SQUARE),
    )


def _linear_compare(o):
    kernel = o.pop("kernel", None) or Kernel(LINEAR, linear_offset=1.0)
    return dict(
        target=make_target(Plane((1.0, 1.0)), kernel),
        init=make_target(Plane((-0.5, 0.5)), kernel),
        grid=build_grid(-1, 1, 0.1),
        loss=LossKind(SQUARE),
    )


def _parametric3d(o):
    kernel = o.pop("kernel", None) or Kernel()
    sign = o.pop("init_sign", -1)
    return dict(
        target=make_target(Plane((1.0, 1.0, -8.0)), kernel),
        init=make_target(Paraboloid(sign, (5.0, 5.0)), kernel),
        grid=build_grid(0, 10, 1, 2),
        loss=LossKind(SQUARE),
    )


_BUILDERS = {
    "gmm1d": _gmm1d,
    "cls2d": _cls2d,
    "image": _image,
    "linear_compare": _linear_compare,
    "parametric3d": _parametric3d,
}

SCENARIO_DEFAULTS: Dict[str, dict] = {
    "gmm1d": dict(eta=0.01, epsilon=1e-4, max_iters=100_000),
    "cls2d": dict(eta=0.001, epsilon=1e-3, max_iters=1000),
    "image": dict(eta=0.01, epsilon=1e-4, max_iters=2000),
    "linear_compare": dict(eta=0.01, epsilon=1e-4, max_iters=1000),
    "parametric3d": dict(eta=0.01, epsilon=1e-4, max_iters=5000),
}

_SCALAR_OVERRIDES = ("eta", "epsilon", "max_iters", "aggregation", "pool_ratio", "alt_prob")


def make_scenario(name: str, **overrides) -> Scenario:
    """Build a named scenario with its default settings.

    Recognized overrides: ``eta``, ``epsilon``, ``max_iters``,
    ``aggregation``, ``pool_ratio``, ``alt_prob``, ``kernel`` and, per
    scenario, ``target_image`` / ``init_image`` / ``alt_image`` (image) or
    ``init_sign`` (parametric3d).
    """
    if name not in _BUILDERS:
        raise ValueError(f"unknown scenario {name!r}; expected one of {', '.join(SCENARIOS)}")
    o = {k: v for k, v in overrides.items() if v is not None}
    fields = _BUILDERS[name](o)
    fields.update(SCENARIO_DEFAULTS[name])
    for key in _SCALAR_OVERRIDES:
        if key in o:
            fields[key] = o.pop(key)
    if o:
        raise ValueError(f"unknown overrides for scenario {name!r}: {', '.join(sorted(o))}")
    return Scenario(name=name, **fields)


def pool_gap_scenario(n: int = 100, eta: float = 0.25, epsilon: float = 1e-4, max_iters: int = 5000):
    """1-d scenario whose initial residual lives only outside a 50% pool.

    Returns the scenario and the pool (the left half of the grid). The
    residual is a bump over the right half and exactly zero on the pool, so
    a teacher confined to the pool never sees a nonzero residual.
    """
    grid = build_grid(0, n * 0.1, 0.1)
    x = grid[:, 0]
    half = n // 2
    resid = np.where(np.arange(n) >= half, np.sin(np.pi * (np.arange(n) - half + 1) / (n - half + 1)), 0.0)
    kernel = Kernel(rbf_scale=0.1)
    target = make_target(Zero(1), kernel)
    init = make_target(Samples(grid, 0.05 * resid), kernel)
    scen = Scenario("pool_gap", target, init, grid, LossKind(SQUARE), eta, epsilon, max_iters)
    return scen, tuple(range(half))


# -- parametric learner -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ParametricLearner:
    """Linear model ``<w, (x, 1)>`` trained by plain gradient descent."""

    w: np.ndarray
    eta: float

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float).ravel()
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        object.__setattr__(self, "w", w)

    def predict(self, X) -> np.ndarray:
        X = as_points(X)
        return X @ self.w[:-1] + self.w[-1]


def parametric_gd_step(p: ParametricLearner, x, y: float) -> ParametricLearner:
    """Square-loss step ``w - eta * 2 * (<w, x~> - y) * x~`` with ``x~ = (x, 1)``."""
    xt = np.append(as_point(x), 1.0)
    if xt.shape != p.w.shape:
        raise ValueError(f"dimension mismatch: weights {p.w.shape[0]}, augmented input {xt.shape[0]}")
    g = 2.0 * (float(xt @ p.w) - y)
    return ParametricLearner(p.w - p.eta * g * xt, p.eta)


@dataclass
class LinearComparison:
    """Trajectories of the linear-kernel, RBF and parametric learners."""

    grid: np.ndarray
    target_vals: np.ndarray
    taught: List[tuple]
    f_linear: List[np.ndarray]
    f_rbf: List[np.ndarray]
    f_param: List[np.ndarray]
    weights: List[np.ndarray]

    @property
    def max_gap(self) -> np.ndarray:
        """Per-iteration max over the grid of |f_linear - <w, (x, 1)>|."""
        return np.array([np.max(np.abs(a - b)) for a, b in zip(self.f_linear, self.f_param)])


def compare_linear(steps: int = 50, scenario: Optional[Scenario] = None) -> LinearComparison:
    """Feed one greedy example stream to nonparametric and parametric learners.

    Examples are chosen by the greedy teacher tracking the linear-kernel
    learner; the RBF learner and the parametric learner receive the same
    stream.
    """
    scen = scenario or make_scenario("linear_compare")
    if not isinstance(scen.init.base, Plane):
        raise ValueError("compare_linear needs a plane-initialized scenario")
    grid = scen.grid
    policy = TeacherPolicy(GFT, 1)
    target_vals = scen.target.evaluate_many(grid)

    lin = LearnerState(scen.init, scen.eta, scen.loss)
    rbf_init = RkhsFunction(scen.init.base, Kernel())
    rbf = LearnerState(rbf_init, scen.eta, scen.loss)
    par = ParametricLearner(np.array(scen.init.base.coefficients), scen.eta)

    out = LinearComparison(grid, target_vals, [], [lin.model.evaluate_many(grid)], [rbf.model.evaluate_many(grid)],
                           [par.predict(grid)], [par.w])
    for _ in range(steps):
        i = int(gft_select(out.f_linear[-1], target_vals, policy)[0])
        x, y = grid[i], float(target_vals[i])
        pack = TeachingPack([x], [y])
        lin = learner_step(lin, pack)
        rbf = learner_step(rbf, pack)
        par = parametric_gd_step(par, x, y)
        out.taught.append((tuple(x), y))
        out.f_linear.append(lin.model.evaluate_many(grid))
        out.f_rbf.append(rbf.model.evaluate_many(grid))
        out.f_param.append(par.predict(grid))
        out.weights.append(par.w)
    return out


def run_scenario(scenario: Scenario, policy: TeacherPolicy, **kwargs) -> SessionLog:
    return run_session(scenario, policy, **kwargs)
