"""Teacher policies (random / greedy functional teaching) and the session loop."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np

from .function_space import RkhsFunction, empirical_l2
from .kernel import as_points, bounding_box, kernel_matrix
from .learner import MEAN, LearnerState, TeachingPack, learner_step
from .loss import LossKind, loss_value, safe_learning_rate, training_label
from .metrics import (
    TOL,
    IterationRecord,
    discrepancy,
    greedy_ratio,
    mean_loss,
    optimal_direction_check,
    sufficient_descent_check,
)

log = logging.getLogger(__name__)

RFT = "rft"
GFT = "gft"

_STREAMS = ("pool", "select", "label", "counterfactual")


class SessionError(RuntimeError):
    pass


class TeachingAssertionError(AssertionError):
    """A per-iteration inequality that must hold was violated."""


def rng_streams(seed: int) -> dict:
    """Independent generators for each random decision of a session."""
    children = np.random.SeedSequence(seed).spawn(len(_STREAMS))
    return {name: np.random.default_rng(s) for name, s in zip(_STREAMS, children)}


@dataclass(frozen=True, eq=False)
class AltTeaching:
    """Substitute labels from ``target`` with probability ``prob`` per iteration."""

    prob: float
    target: RkhsFunction

    def __post_init__(self):
        if not (0.0 <= self.prob <= 1.0):
            raise ValueError(f"alt.prob must lie in [0, 1], got {self.prob}")


@dataclass(frozen=True)
class TeacherPolicy:
    """How examples are chosen.

    ``k`` is an ``int`` pack size or a ``float`` ratio in (0, 1] of the pool.
    ``pool`` restricts selection to a subset of grid indices.
    """

    kind: str = GFT
    k: Union[int, float] = 1
    pool: Optional[Tuple[int, ...]] = None
    alt: Optional[AltTeaching] = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in (RFT, GFT):
            raise ValueError(f"unknown teacher kind {self.kind!r}")
        if isinstance(self.k, bool) or not isinstance(self.k, (int, float, np.integer, np.floating)):
            raise ValueError(f"k must be an int or a ratio, got {self.k!r}")
        if isinstance(self.k, (int, np.integer)):
            if self.k < 1:
                raise ValueError(f"integer k must be >= 1, got {self.k}")
        elif not (0.0 < self.k <= 1.0):
            raise ValueError(f"ratio k must lie in (0, 1], got {self.k}")
        if self.pool is not None:
            object.__setattr__(self, "pool", tuple(sorted(int(i) for i in self.pool)))
            if not self.pool:
                raise ValueError("pool must not be empty")

    def pool_indices(self, n: int) -> np.ndarray:
        if self.pool is None:
            return np.arange(n)
        pool = np.asarray(self.pool, dtype=int)
        if pool[0] < 0 or pool[-1] >= n:
            raise ValueError(f"pool indices must lie in [0, {n})")
        return pool

    def pack_size(self, pool_size: int) -> int:
        return resolve_k(self.k, pool_size)


def resolve_k(k: Union[int, float], pool_size: int) -> int:
    if isinstance(k, (int, np.integer)) and not isinstance(k, bool):
        resolved = int(k)
    else:
        resolved = max(1, int(round(k * pool_size)))
    if resolved > pool_size:
        raise ValueError(f"pack size {resolved} exceeds pool size {pool_size}")
    return resolved


def make_pool(ratio: float, n: int, seed: int) -> Tuple[int, ...]:
    """Seeded uniform subsample of ``round(ratio * n)`` grid indices."""
    if not (0.0 < ratio <= 1.0):
        raise ValueError(f"pool ratio must lie in (0, 1], got {ratio}")
    size = max(1, int(round(ratio * n)))
    rng = rng_streams(seed)["pool"]
    return tuple(int(i) for i in np.sort(rng.choice(n, size=size, replace=False)))


def rft_select(policy: TeacherPolicy, n_grid: int, rng: np.random.Generator) -> np.ndarray:
    """Draw k distinct pool indices uniformly at random."""
    pool = policy.pool_indices(n_grid)
    k = policy.pack_size(pool.shape[0])
    return rng.choice(pool, size=k, replace=False)


def gft_select(f_vals, target_vals, policy: TeacherPolicy) -> np.ndarray:
    """Pool indices of the k largest ``|f(x) - f*(x)|``, largest first.

    Ties go to the smaller grid index.
    """
    f_vals = np.asarray(f_vals, dtype=float)
    target_vals = np.asarray(target_vals, dtype=float)
    if f_vals.shape != target_vals.shape:
        raise ValueError("model and target values must cover the same grid")
    pool = policy.pool_indices(f_vals.shape[0])
    k = policy.pack_size(pool.shape[0])
    resid = np.abs(f_vals[pool] - target_vals[pool])
    order = np.argsort(-resid, kind="stable")
    return pool[order[:k]]


def match_magnitude(alt_vals, target_vals) -> np.ndarray:
    """Affinely rescale ``alt_vals`` so its min/max match the target's."""
    alt_vals = np.asarray(alt_vals, dtype=float)
    lo, hi = alt_vals.min(), alt_vals.max()
    tlo, thi = float(np.min(target_vals)), float(np.max(target_vals))
    if hi == lo:
        return np.full_like(alt_vals, tlo)
    return tlo + (alt_vals - lo) * ((thi - tlo) / (hi - lo))


def label_pack(
    indices,
    grid,
    target_vals,
    policy: TeacherPolicy,
    rng: np.random.Generator,
    alt_vals=None,
    loss: Optional[LossKind] = None,
) -> Tuple[TeachingPack, bool]:
    """Label the selected points with the target, or with the alternative.

    One Bernoulli draw per call decides whether the whole pack is labeled by
    the alternative target. Returns the pack and whether it was substituted.
    """
    indices = np.asarray(indices, dtype=int)
    grid = as_points(grid)
    substituted = False
    if policy.alt is not None:
        substituted = bool(rng.random() < policy.alt.prob)
    source = alt_vals if substituted else target_vals
    if substituted and source is None:
        raise ValueError("alternative teaching needs alternative values")
    ys = np.asarray(source, dtype=float)[indices]
    if loss is not None:
        ys = np.atleast_1d(training_label(loss, ys))
    return TeachingPack(grid[indices], ys), substituted


@dataclass(frozen=True)
class Assertions:
    lemma_descent: bool = False
    theorem1: bool = False


@dataclass
class SessionLog:
    records: List[IterationRecord]
    M0: float
    Lbar0: float
    converged: bool
    eta: float
    epsilon: float
    k: int
    pool: np.ndarray
    safe_rate: Optional[float]
    descent_checked: bool
    model: RkhsFunction = field(repr=False)
    substitutions: int = 0

    @property
    def itd(self) -> int:
        return self.records[-1].t if self.records else 0

    @property
    def M_history(self) -> np.ndarray:
        return np.array([self.M0] + [r.M for r in self.records])


def run_session(
    scenario,
    policy: TeacherPolicy,
    assertions: Assertions = Assertions(),
    max_iters: Optional[int] = None,
    epsilon: Optional[float] = None,
) -> SessionLog:
    """Teach until ``M(f^t, f*) < epsilon`` or ``max_iters`` steps were taken.

    ``scenario`` provides ``target``, ``init``, ``grid``, ``loss``, ``eta``,
    ``epsilon``, ``max_iters`` and ``aggregation``.
    """
    grid = as_points(scenario.grid)
    n = grid.shape[0]
    loss = scenario.loss
    eta = scenario.eta
    eps = scenario.epsilon if epsilon is None else epsilon
    T = scenario.max_iters if max_iters is None else max_iters
    kernel = scenario.init.kernel

    pool = policy.pool_indices(n)
    k = policy.pack_size(pool.shape[0])
    streams = rng_streams(policy.seed)

    target_vals = scenario.target.evaluate_many(grid)
    labels_star = np.atleast_1d(training_label(loss, target_vals))
    alt_vals = None
    if policy.alt is not None:
        alt_vals = match_magnitude(policy.alt.target.evaluate_many(grid), target_vals)

    state = LearnerState(scenario.init, eta, loss, aggregation=getattr(scenario, "aggregation", MEAN))
    f = scenario.init.evaluate_many(grid)
    if not np.all(np.isfinite(f)):
        raise SessionError("non-finite model values at iteration 0")

    M = M0 = empirical_l2(f, target_vals)
    lbar0 = mean_loss(loss, f, target_vals)
    safe = safe_learning_rate(loss, kernel, bounding_box(grid))
    descent_checked = assertions.lemma_descent and safe is not None and eta <= safe and k == 1
    if assertions.lemma_descent and not descent_checked:
        log.info("sufficient-descent assertions disabled (loss=%s, eta=%g, safe=%s, k=%d)",
                 loss.kind, eta, safe, k)
    direction_checked = assertions.theorem1 and loss.smoothness is not None

    records: List[IterationRecord] = []
    psi = 0.0
    t = 0
    substitutions = 0
    while t < T and M >= eps:
        if policy.kind == GFT:
            idx = gft_select(f, target_vals, policy)
        else:
            idx = rft_select(policy, n, streams["select"])
        pack, substituted = label_pack(idx, grid, target_vals, policy, streams["label"], alt_vals, loss)
        substitutions += substituted

        # diagnostics at f^t: greedy optimum vs a counterfactual uniform pick
        S_pool = discrepancy(loss, f[pool], labels_star[pool])
        j_star = int(pool[int(np.argmax(S_pool))])
        S_star = float(S_pool.max())
        cf_pos = int(streams["counterfactual"].integers(pool.shape[0]))
        cf = int(pool[cf_pos])
        # same array as S_star, so S_rand <= S_star holds bit for bit
        S_rand = float(S_pool[cf_pos])
        gamma = greedy_ratio(S_rand, S_star)
        direction = optimal_direction_check(
            loss, (f[j_star], target_vals[j_star]), (f[cf], target_vals[cf])
        )

        first = int(idx[0])
        y0 = pack.ys[0]
        loss_before = loss_value(loss, f[first], y0)
        S_taught = float(discrepancy(loss, f[first], y0))

        try:
            state = learner_step(state, pack)
        except ValueError as exc:
            raise SessionError(f"learner step failed at iteration {t + 1}: {exc}") from exc
        centers, coeffs = state.last_update
        f = f + kernel_matrix(kernel, grid, centers) @ coeffs
        t += 1
        if not np.all(np.isfinite(f)):
            raise SessionError(f"non-finite model values at iteration {t}")

        loss_after = loss_value(loss, f[first], y0)
        check = sufficient_descent_check(loss_before, loss_after, eta, S_taught)
        psi += 1.0 if gamma is None else gamma
        M = empirical_l2(f, target_vals)
        denom = psi if policy.kind == GFT else t
        records.append(
            IterationRecord(
                t=t,
                selected=[(tuple(map(float, x)), float(y)) for x, y in zip(pack.xs, pack.ys)],
                S_star=S_star,
                S_rand=S_rand,
                gamma=math.nan if gamma is None else gamma,
                psi=psi,
                M=M,
                Lbar=mean_loss(loss, f, target_vals),
                descent_lhs=loss_after - loss_before,
                descent_rhs=-(eta / 2.0) * S_taught,
                bound_rhs=2.0 * lbar0 / (eta * denom) if denom > 0 else math.inf,
                indices=[int(i) for i in idx],
                S_taught=S_taught,
                direction=direction,
            )
        )
        if descent_checked and not check.passed:
            raise TeachingAssertionError(
                f"sufficient descent violated at iteration {t}: slack {check.slack!r}"
            )
        if direction_checked and direction < -TOL:
            raise TeachingAssertionError(
                f"greedy direction check violated at iteration {t}: {direction!r}"
            )

    return SessionLog(
        records=records,
        M0=M0,
        Lbar0=lbar0,
        converged=M < eps,
        eta=eta,
        epsilon=eps,
        k=k,
        pool=pool,
        safe_rate=safe,
        descent_checked=descent_checked,
        model=state.model,
        substitutions=substitutions,
    )
