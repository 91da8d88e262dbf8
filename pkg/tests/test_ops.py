"""Kernel-level checks: frozen values, algebraic properties, gradients.

Expected constants were computed independently with plain numpy formulas
and frozen here; gradient checks compare every hand-derived backward pass
against central finite differences.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from singledet.nn import (
    Parameter,
    Rng,
    concat,
    concat_backward,
    conv_text,
    conv_text_backward,
    dense,
    dense_backward,
    dropout,
    dropout_backward,
    gradient_check,
    maxpool_over_time,
    maxpool_over_time_backward,
    relu,
    relu_backward,
    softmax,
    softmax_backward,
    sparse_ce_backward,
    sparse_ce_loss,
)

SOFTMAX_123 = [0.09003057317038046, 0.24472847105479764, 0.6652409557748218]
CE_LOSS_123_LABEL0 = 2.40760596444438
CE_GRAD_123_LABEL0 = [-0.9099694268296196, 0.24472847105479764, 0.6652409557748218]

OP_TOL = 1e-6


class TestRelu:
    def test_values(self):
        assert_allclose(relu(np.array([-2.0, -0.5, 0.0, 0.5, 3.0])), [0.0, 0.0, 0.0, 0.5, 3.0])

    def test_idempotent(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            x = rng.standard_normal(17)
            assert_allclose(relu(relu(x)), relu(x))

    def test_backward_zero_at_zero(self):
        x = np.array([-1.0, 0.0, 2.0])
        g = np.ones(3)
        assert_allclose(relu_backward(g, x), [0.0, 0.0, 1.0])

    def test_gradient(self):
        rng = np.random.default_rng(12)
        # keep samples away from the kink at 0
        x = rng.standard_normal(9)
        x = np.where(np.abs(x) < 0.05, 0.3, x)
        c = rng.standard_normal(9)
        p = Parameter("x", x)

        def loss():
            p.zero_grad()
            y = relu(p.value)
            p.grad += relu_backward(c, p.value)
            return float(y @ c)

        assert gradient_check(loss, [p]) < OP_TOL


class TestSoftmax:
    def test_frozen_values(self):
        assert_allclose(softmax(np.array([1.0, 2.0, 3.0])), SOFTMAX_123, rtol=1e-12)

    def test_sums_to_one(self):
        rng = np.random.default_rng(21)
        for _ in range(30):
            z = rng.standard_normal(rng.integers(2, 12)) * 10.0
            p = softmax(z)
            assert_allclose(p.sum(), 1.0, rtol=1e-12)
            assert (p >= 0.0).all()

    def test_shift_invariance(self):
        rng = np.random.default_rng(22)
        for _ in range(20):
            z = rng.standard_normal(6)
            c = float(rng.standard_normal())
            assert_allclose(softmax(z + c), softmax(z), rtol=1e-10, atol=1e-12)

    def test_extreme_logits_stay_finite(self):
        p = softmax(np.array([1000.0, 0.0, -1000.0]))
        assert np.isfinite(p).all()
        assert_allclose(p.sum(), 1.0)

    def test_gradient(self):
        rng = np.random.default_rng(23)
        z = rng.standard_normal(5)
        c = rng.standard_normal(5)
        p = Parameter("z", z)

        def loss():
            p.zero_grad()
            probs = softmax(p.value)
            p.grad += softmax_backward(c, probs)
            return float(probs @ c)

        assert gradient_check(loss, [p]) < OP_TOL


class TestDense:
    def test_shape_and_value(self):
        x = np.array([1.0, 2.0])
        w = np.array([[1.0, 0.0, 2.0], [0.0, 1.0, 3.0]])
        b = np.array([10.0, 20.0, 30.0])
        assert_allclose(dense(x, w, b), [11.0, 22.0, 38.0])

    def test_gradient_all_inputs(self):
        rng = np.random.default_rng(31)
        x = Parameter("x", rng.standard_normal(4))
        w = Parameter("w", rng.standard_normal((4, 3)))
        b = Parameter("b", rng.standard_normal(3))
        c = rng.standard_normal(3)

        def loss():
            for p in (x, w, b):
                p.zero_grad()
            y = dense(x.value, w.value, b.value)
            dx, dw, db = dense_backward(c, x.value, w.value)
            x.grad += dx
            w.grad += dw
            b.grad += db
            return float(y @ c)

        assert gradient_check(loss, [x, w, b]) < OP_TOL


class TestConvText:
    def test_all_ones_oracle(self):
        # length 4, depth 3 input of ones; one 2x3 filter of ones, zero bias:
        # every window sums 6 elements.
        x = np.ones((4, 3))
        filters = np.ones((2, 3, 1))
        out = conv_text(x, filters, np.zeros(1))
        assert_allclose(out, [[6.0], [6.0], [6.0]])

    def test_output_length(self):
        rng = np.random.default_rng(41)
        for k in (2, 3, 4):
            x = rng.standard_normal((10, 5))
            filters = rng.standard_normal((k, 5, 7))
            assert conv_text(x, filters, np.zeros(7)).shape == (10 - k + 1, 7)

    def test_translation_equivariance(self):
        rng = np.random.default_rng(42)
        x = rng.standard_normal((9, 4))
        filters = rng.standard_normal((3, 4, 6))
        bias = rng.standard_normal(6)
        out = conv_text(x, filters, bias)
        out_shifted = conv_text(x[1:], filters, bias)
        assert_allclose(out_shifted, out[1:], rtol=1e-12)

    def test_depth_mismatch_raises(self):
        with pytest.raises(ValueError, match="depth"):
            conv_text(np.ones((5, 3)), np.ones((2, 4, 1)), np.zeros(1))

    def test_short_input_raises(self):
        with pytest.raises(ValueError, match="shorter"):
            conv_text(np.ones((2, 3)), np.ones((4, 3, 1)), np.zeros(1))

    def test_gradient_all_inputs(self):
        rng = np.random.default_rng(43)
        x = Parameter("x", rng.standard_normal((6, 3)))
        f = Parameter("f", rng.standard_normal((2, 3, 4)))
        b = Parameter("b", rng.standard_normal(4))
        c = rng.standard_normal((5, 4))

        def loss():
            for p in (x, f, b):
                p.zero_grad()
            y = conv_text(x.value, f.value, b.value)
            dx, df, db = conv_text_backward(c, x.value, f.value)
            x.grad += dx
            f.grad += df
            b.grad += db
            return float((y * c).sum())

        assert gradient_check(loss, [x, f, b]) < OP_TOL


class TestMaxpool:
    def test_column_max(self):
        x = np.array([[1.0, 5.0], [3.0, 2.0], [2.0, 4.0]])
        assert_allclose(maxpool_over_time(x), [3.0, 5.0])

    def test_row_permutation_invariance(self):
        rng = np.random.default_rng(51)
        for _ in range(20):
            x = rng.standard_normal((7, 4))
            perm = rng.permutation(7)
            assert_allclose(maxpool_over_time(x[perm]), maxpool_over_time(x))

    def test_tie_routes_to_first_row(self):
        x = np.array([[2.0], [2.0], [1.0]])
        dx = maxpool_over_time_backward(np.array([1.0]), x)
        assert_allclose(dx, [[1.0], [0.0], [0.0]])

    def test_gradient(self):
        rng = np.random.default_rng(52)
        x = Parameter("x", rng.standard_normal((6, 5)))
        c = rng.standard_normal(5)

        def loss():
            x.zero_grad()
            y = maxpool_over_time(x.value)
            x.grad += maxpool_over_time_backward(c, x.value)
            return float(y @ c)

        assert gradient_check(loss, [x]) < OP_TOL


class TestDropout:
    def test_eval_mode_is_identity(self):
        x = np.arange(12.0).reshape(3, 4)
        y, mask = dropout(x, 0.5, Rng(0), training=False)
        assert y is x
        assert mask is None

    def test_rate_zero_is_identity(self):
        x = np.ones(8)
        y, mask = dropout(x, 0.0, Rng(0), training=True)
        assert y is x
        assert mask is None

    def test_invalid_rate_raises(self):
        for rate in (-0.1, 1.0, 1.5):
            with pytest.raises(ValueError, match="rate"):
                dropout(np.ones(3), rate, Rng(0), training=True)

    def test_missing_rng_raises(self):
        with pytest.raises(ValueError, match="Rng"):
            dropout(np.ones(3), 0.5, None, training=True)

    def test_survivor_scaling_preserves_mean(self):
        x = np.ones(200_000)
        y, mask = dropout(x, 0.2, Rng(7), training=True)
        # survivors carry value 1/(1-rate); the mean stays near 1
        assert abs(float(y.mean()) - 1.0) < 0.01
        assert_allclose(y[mask], 1.0 / 0.8)
        assert_allclose(y[~mask], 0.0)
        assert abs(float(mask.mean()) - 0.8) < 0.01

    def test_deterministic_under_seed(self):
        x = np.ones(1000)
        y1, _ = dropout(x, 0.3, Rng(5), training=True)
        y2, _ = dropout(x, 0.3, Rng(5), training=True)
        assert_allclose(y1, y2)

    def test_backward_matches_mask(self):
        rng = Rng(9)
        x = np.ones(500)
        y, mask = dropout(x, 0.4, rng, training=True)
        g = np.full(500, 2.0)
        dx = dropout_backward(g, mask, 0.4)
        assert_allclose(dx[mask], 2.0 / 0.6)
        assert_allclose(dx[~mask], 0.0)
        assert_allclose(dropout_backward(g, None, 0.4), g)


class TestConcat:
    def test_round_trip(self):
        rng = np.random.default_rng(61)
        parts = [rng.standard_normal(n) for n in (3, 1, 4)]
        joined = concat(parts)
        assert joined.shape == (8,)
        back = concat_backward(joined, [3, 1, 4])
        for a, b in zip(back, parts):
            assert_allclose(a, b)

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            concat([])


class TestSparseCE:
    def test_frozen_loss_and_grad(self):
        probs = softmax(np.array([1.0, 2.0, 3.0]))
        assert_allclose(sparse_ce_loss(probs, 0), CE_LOSS_123_LABEL0, rtol=1e-12)
        assert_allclose(sparse_ce_backward(probs, 0), CE_GRAD_123_LABEL0, rtol=1e-12)

    def test_probability_floor(self):
        probs = np.array([0.0, 1.0])
        loss = sparse_ce_loss(probs, 0)
        assert np.isfinite(loss)
        assert_allclose(loss, -np.log(1e-12))

    def test_label_out_of_range(self):
        probs = np.array([0.5, 0.5])
        for label in (-1, 2):
            with pytest.raises(ValueError, match="label"):
                sparse_ce_loss(probs, label)
            with pytest.raises(ValueError, match="label"):
                sparse_ce_backward(probs, label)

    def test_combined_gradient_sums_to_zero(self):
        rng = np.random.default_rng(71)
        for _ in range(20):
            probs = softmax(rng.standard_normal(4))
            g = sparse_ce_backward(probs, int(rng.integers(0, 4)))
            assert_allclose(g.sum(), 0.0, atol=1e-12)

    def test_fused_gradient_vs_finite_differences(self):
        rng = np.random.default_rng(72)
        z = Parameter("z", rng.standard_normal(4))

        def loss():
            z.zero_grad()
            probs = softmax(z.value)
            z.grad += sparse_ce_backward(probs, 2)
            return sparse_ce_loss(probs, 2)

        assert gradient_check(loss, [z]) < OP_TOL


class TestGradientCheckHarness:
    def test_exact_gradient_scores_near_zero(self):
        p = Parameter("p", np.array([0.5, -1.5, 2.0]))

        def loss():
            p.zero_grad()
            p.grad += 2.0 * p.value
            return float(p.value @ p.value)

        assert gradient_check(loss, [p]) < 1e-8

    def test_corrupted_gradient_is_caught(self):
        # doubling the analytic gradient must score a relative error near 1
        p = Parameter("p", np.array([0.5, -1.5, 2.0]))

        def loss():
            p.zero_grad()
            p.grad += 4.0 * p.value
            return float(p.value @ p.value)

        err = gradient_check(loss, [p])
        assert 0.9 < err < 1.1
