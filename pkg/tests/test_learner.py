import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nimt.function_space import GaussianMixture1D, Zero, make_target
from nimt.kernel import Kernel, kernel_matrix
from nimt.learner import SUM, LearnerState, ModelView, TeachingPack, learner_step
from nimt.loss import HINGE, SQUARE, LossKind, gradient_scalar, loss_value


def state(eta=0.1, base=None, loss=SQUARE, **kw):
    return LearnerState(make_target(base or Zero(1)), eta, LossKind(loss), **kw)


class TestTeachingPack:
    def test_of(self):
        p = TeachingPack.of([((0.0, 1.0), 2.0), ((1.0, 1.0), 3.0)])
        assert p.k == 2 and p.xs.shape == (2, 2)

    def test_empty(self):
        with pytest.raises(ValueError):
            TeachingPack.of([])
        with pytest.raises(ValueError):
            TeachingPack([], [])


class TestLearnerStep:
    def test_single_example(self):
        s = learner_step(state(0.1), TeachingPack([0.4], [1.0]))
        assert s.model(0.4) == pytest.approx(0.2, abs=1e-15)
        assert s.step_count == 1

    def test_zero_gradient_keeps_model(self):
        s0 = state(0.1)
        s1 = learner_step(s0, TeachingPack([0.4], [0.0]))
        assert s1.model is s0.model
        assert s1.step_count == 1

    def test_duplicate_pack_equals_single(self, rng):
        s0 = state(0.1, GaussianMixture1D((1.0,), (0.0,), (1.0,)))
        single = learner_step(s0, TeachingPack([0.5], [1.0]))
        double = learner_step(s0, TeachingPack([0.5, 0.5], [1.0, 1.0]))
        probes = rng.uniform(-4, 4, 50)
        np.testing.assert_allclose(single.model.evaluate_many(probes), double.model.evaluate_many(probes),
                                   rtol=0, atol=1e-15)

    def test_sum_aggregation(self):
        s = learner_step(state(0.1, aggregation=SUM), TeachingPack([0.0, 10.0], [1.0, 1.0]))
        np.testing.assert_allclose(s.model.coeffs, [0.2, 0.2])

    def test_rejects_bad_eta(self):
        with pytest.raises(ValueError):
            state(0.0)

    def test_one_step_pointwise_identity(self, rng):
        k = Kernel()
        s = state(0.05, GaussianMixture1D((1.0,), (-1.0,), (0.7,)))
        for _ in range(3):
            s = learner_step(s, TeachingPack(rng.uniform(-3, 3, 2), rng.normal(size=2)))
        xs, ys = rng.uniform(-3, 3, 4), rng.normal(size=4)
        g = gradient_scalar(s.loss, s.model.evaluate_many(xs), ys)
        s2 = learner_step(s, TeachingPack(xs, ys))
        probes = rng.uniform(-5, 5, 100)
        change = s2.model.evaluate_many(probes) - s.model.evaluate_many(probes)
        predicted = (0.05 / 4) * kernel_matrix(k, probes, xs) @ g
        np.testing.assert_allclose(change + predicted, 0.0, atol=1e-12)

    @settings(max_examples=300)
    @given(st.floats(-3, 3), st.floats(1e-6, 0.25), st.floats(-2, 2))
    def test_square_drop_closed_form(self, e, eta, x):
        s = state(eta)
        s2 = learner_step(s, TeachingPack([x], [-e]))
        before = loss_value(s.loss, s.model(x), -e)
        after = loss_value(s.loss, s2.model(x), -e)
        assert before - after == pytest.approx(4 * eta * (1 - eta) * e * e, abs=1e-10)

    def test_hinge_step(self):
        s = learner_step(state(0.5, loss=HINGE), TeachingPack([0.0], [1.0]))
        assert s.model(0.0) == pytest.approx(0.5)


def test_gray_box_view_exposes_only_evaluation():
    s = state(0.1)
    v = s.view()
    assert isinstance(v, ModelView)
    assert v(0.3) == 0.0
    assert v.evaluate_many([0.0, 1.0]).shape == (2,)
    for attr in ("eta", "loss", "model", "aggregation"):
        assert not hasattr(v, attr)
    with pytest.raises(AttributeError):
        v.eta = 1.0
