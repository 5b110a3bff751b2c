"""Nonparametric iterative machine teaching in a reproducing kernel Hilbert space.

Models are functions ``f = base + sum_i a_i K(x_i, .)``; learners run
functional gradient descent on examples chosen by a random (RFT) or greedy
(GFT) teacher.
"""

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
    add_expansion_term,
    empirical_l2,
    evaluate,
    make_target,
)
from .harness import (
    ParametricLearner,
    Scenario,
    build_grid,
    compare_linear,
    make_scenario,
    parametric_gd_step,
)
from .kernel import Kernel, eval_kernel, gram_matrix, kernel_bound
from .learner import LearnerState, TeachingPack, learner_step
from .loss import LossKind, gradient_scalar, loss_value, safe_learning_rate
from .metrics import (
    IterationRecord,
    bound_monitor,
    discrepancy,
    greedy_ratio,
    optimal_direction_check,
    sufficient_descent_check,
)
from .teacher import (
    AltTeaching,
    Assertions,
    TeacherPolicy,
    gft_select,
    label_pack,
    rft_select,
    run_session,
)

__version__ = "0.1.0"
