"""Per-iteration teaching diagnostics and descent/direction checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .loss import LossKind, gradient_scalar, loss_value, training_label

TOL = 1e-12


class GreedyRatioError(ArithmeticError):
    """The greedy pick had a smaller discrepancy than a counterfactual pick."""


@dataclass
class IterationRecord:
    """Diagnostics for one teaching iteration.

    ``t`` counts completed learner steps, so the record for the first step
    has ``t == 1`` and the last record's ``t`` is the realized teaching
    dimension. ``psi`` is the running sum of greedy ratios up to and
    including this step, hence ``psi <= t``.
    """

    t: int
    selected: List[Tuple[Tuple[float, ...], float]]
    S_star: float
    S_rand: float
    gamma: float
    psi: float
    M: float
    Lbar: float
    descent_lhs: float
    descent_rhs: float
    bound_rhs: float
    indices: List[int] = field(default_factory=list)
    S_taught: float = 0.0
    direction: float = 0.0


def discrepancy(l: LossKind, pred, y):
    """Squared gradient scalar at the point: S_L = (dL/df)^2."""
    g = gradient_scalar(l, pred, y)
    return g * g


def greedy_ratio(S_rand: float, S_star: float) -> Optional[float]:
    """S_rand / S_star, or None once the greedy discrepancy has vanished."""
    if S_rand > S_star + TOL:
        raise GreedyRatioError(
            f"counterfactual discrepancy {S_rand!r} exceeds greedy discrepancy {S_star!r}"
        )
    if S_star == 0.0:
        return None
    return S_rand / S_star


class DescentCheck(NamedTuple):
    passed: bool
    slack: float


def sufficient_descent_check(loss_before: float, loss_after: float, eta: float, S: float) -> DescentCheck:
    """Check ``loss_after - loss_before <= -(eta / 2) * S`` up to 1e-12.

    ``slack`` is how far the realized change sits below the bound.
    """
    slack = -(eta / 2.0) * S - (loss_after - loss_before)
    return DescentCheck(slack >= -TOL, slack)


def optimal_direction_check(l: LossKind, greedy: Tuple[float, float], other: Tuple[float, float]) -> float:
    """Inner product <G* - G, f^t - f*> via the reproducing property.

    Each pair is ``(f^t(x), f*(x))``. For a kernel section scaled by ``g``,
    ``<g K_x, f^t - f*> = g * (f^t(x) - f*(x))``.
    """

    def term(pair):
        pred, y = pair
        g = gradient_scalar(l, pred, training_label(l, y))
        return g * (pred - y)

    return term(greedy) - term(other)


class BoundPoint(NamedTuple):
    t: int
    min_S: float
    bound: float
    bound_psi: float

    @property
    def crossed(self) -> bool:
        return self.min_S > self.bound


def bound_monitor(records: Sequence[IterationRecord], eta_min: float, lbar0: float) -> List[BoundPoint]:
    """Running minimum of taught discrepancy against the convergence bounds.

    ``bound = 2 * lbar0 / (eta_min * t)`` and
    ``bound_psi = 2 * lbar0 / (eta_min * psi(t))``.
    """
    out = []
    running = math.inf
    for r in records:
        running = min(running, r.S_taught)
        bound = 2.0 * lbar0 / (eta_min * r.t)
        bound_psi = 2.0 * lbar0 / (eta_min * r.psi) if r.psi > 0 else math.inf
        out.append(BoundPoint(r.t, running, bound, bound_psi))
    return out


def crossings(points: Sequence[BoundPoint]) -> List[int]:
    return [p.t for p in points if p.crossed]


def mean_loss(l: LossKind, preds: np.ndarray, target_vals: np.ndarray) -> float:
    """Mean pointwise loss against the target over the evaluation grid."""
    return float(np.mean(loss_value(l, preds, training_label(l, target_vals))))
