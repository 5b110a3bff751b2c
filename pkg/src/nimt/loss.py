"""Pointwise convex losses and their derivatives in the prediction."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .kernel import Box, Kernel, kernel_bound

SQUARE = "square"
HINGE = "hinge"


@dataclass(frozen=True)
class LossKind:
    kind: str = SQUARE

    def __post_init__(self):
        if self.kind not in (SQUARE, HINGE):
            raise ValueError(f"unknown loss kind {self.kind!r}")

    @property
    def smoothness(self) -> Optional[float]:
        """Lipschitz constant of the gradient scalar, if it exists."""
        return 2.0 if self.kind == SQUARE else None


def _check_labels(l: LossKind, y):
    if l.kind == HINGE and not np.all((y == 1) | (y == -1)):
        raise ValueError(f"hinge loss needs labels in {{-1, 1}}, got {y}")


def loss_value(l: LossKind, pred, y):
    """Square: (y - pred)^2. Hinge: max(0, 1 - y * pred). Vectorized."""
    pred = np.asarray(pred, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_labels(l, y)
    if l.kind == SQUARE:
        out = (y - pred) ** 2
    else:
        out = np.maximum(0.0, 1.0 - y * pred)
    return float(out) if out.ndim == 0 else out


def gradient_scalar(l: LossKind, pred, y):
    """dL/df at (pred, y).

    The hinge subgradient at the kink ``y * pred == 1`` is taken as 0.
    """
    pred = np.asarray(pred, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_labels(l, y)
    if l.kind == SQUARE:
        out = 2.0 * (pred - y)
    else:
        out = np.where(y * pred < 1.0, -y, 0.0)
    return float(out) if out.ndim == 0 else out


def training_label(l: LossKind, target_value):
    """Map a target value f*(x) to the label fed to a learner with loss ``l``.

    Regression labels pass through; classification labels are the sign of
    the target, with 0 mapped to +1.
    """
    v = np.asarray(target_value, dtype=float)
    if l.kind == SQUARE:
        out = v
    else:
        out = np.where(v >= 0.0, 1.0, -1.0)
    return float(out) if out.ndim == 0 else out


def safe_learning_rate(l: LossKind, k: Kernel, domain_box: Optional[Box] = None) -> Optional[float]:
    """Largest eta with guaranteed sufficient descent, 1 / (2 L_L M_K).

    Returns None for hinge loss, whose gradient is not Lipschitz.
    """
    if l.smoothness is None:
        return None
    return 1.0 / (2.0 * l.smoothness * kernel_bound(k, domain_box))
