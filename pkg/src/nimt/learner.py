"""Gray-box iterative learner running functional gradient descent."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple

import numpy as np

from .function_space import RkhsFunction
from .kernel import as_points
from .loss import LossKind, gradient_scalar

MEAN = "mean"
SUM = "sum"


@dataclass(frozen=True, eq=False)
class TeachingPack:
    """A pack of k teaching examples ``(x_j, y_j)``.

    Teachers always emit distinct points; the learner itself tolerates
    repeats (they simply contribute repeated gradient terms).
    """

    xs: np.ndarray
    ys: np.ndarray

    def __init__(self, xs, ys):
        ys = np.asarray(ys, dtype=float).ravel()
        xs = as_points(xs).reshape(ys.shape[0], -1) if ys.size else np.empty((0, 1))
        if ys.shape[0] == 0:
            raise ValueError("a teaching pack needs at least one example")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @classmethod
    def of(cls, examples: Sequence[Tuple[object, float]]) -> "TeachingPack":
        if not examples:
            raise ValueError("a teaching pack needs at least one example")
        xs, ys = zip(*examples)
        return cls([np.atleast_1d(np.asarray(x, dtype=float)) for x in xs], ys)

    @property
    def k(self) -> int:
        return self.ys.shape[0]

    def __len__(self):
        return self.k


@dataclass(frozen=True)
class LearnerState:
    model: RkhsFunction
    eta: float
    loss: LossKind = field(default_factory=LossKind)
    step_count: int = 0
    aggregation: str = MEAN
    # (centers, coeffs) added by the most recent step
    last_update: Optional[Tuple[np.ndarray, np.ndarray]] = field(default=None, repr=False)

    def __post_init__(self):
        if not (self.eta > 0 and np.isfinite(self.eta)):
            raise ValueError(f"eta must be positive, got {self.eta}")
        if self.aggregation not in (MEAN, SUM):
            raise ValueError(f"aggregation must be 'mean' or 'sum', got {self.aggregation!r}")

    def view(self) -> "ModelView":
        return ModelView(self.model)


class ModelView:
    """What a teacher may see of a learner: evaluations of f^t, nothing else."""

    __slots__ = ("_model",)

    def __init__(self, model: RkhsFunction):
        self._model = model

    def __call__(self, x) -> float:
        return self._model(x)

    def evaluate_many(self, X) -> np.ndarray:
        return self._model.evaluate_many(X)


def learner_step(s: LearnerState, pack: TeachingPack) -> LearnerState:
    """One functional gradient step on a pack.

    Each example contributes a term ``-eta * g_j / k`` centered at ``x_j``
    (``-eta * g_j`` with sum aggregation), where ``g_j`` is the gradient
    scalar of the loss at ``(f^t(x_j), y_j)``.
    """
    if pack.k == 0:
        raise ValueError("empty teaching pack")
    preds = s.model.evaluate_many(pack.xs)
    g = np.atleast_1d(gradient_scalar(s.loss, preds, pack.ys))
    scale = s.eta / pack.k if s.aggregation == MEAN else s.eta
    coeffs = -scale * g
    live = coeffs != 0.0
    return replace(
        s,
        model=s.model.add_terms(pack.xs[live], coeffs[live]),
        step_count=s.step_count + 1,
        last_update=(pack.xs, coeffs),
    )
