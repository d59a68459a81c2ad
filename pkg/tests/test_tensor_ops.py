"""Forward tensor ops against hand values and naive loop oracles."""

import numpy as np
import pytest

from lostnet import backend
from lostnet.tensor import ConvParams, ShapeError, ops

from oracles import naive_conv2d, naive_linear, naive_batchnorm_train


def random_conv_case(rng, dtype):
    """One random (input, params) pair mixing standard/grouped/depthwise/pointwise."""
    kind = rng.integers(4)
    n = int(rng.integers(1, 3))
    h = int(rng.integers(4, 9))
    w = int(rng.integers(4, 9))
    if kind == 0:  # standard
        c, o, k, groups = int(rng.integers(1, 5)), int(rng.integers(1, 6)), int(rng.choice([1, 3])), 1
    elif kind == 1:  # grouped
        groups = 2
        c, o, k = 4, int(rng.choice([2, 4, 6])), 3
    elif kind == 2:  # depthwise
        c = int(rng.integers(1, 5))
        o, k, groups = c, 3, c
    else:  # pointwise
        c, o, k, groups = int(rng.integers(1, 5)), int(rng.integers(1, 6)), 1, 1
    stride = int(rng.choice([1, 2]))
    padding = int(rng.choice([0, 1]))
    if h + 2 * padding < k or w + 2 * padding < k:
        padding = 1
    x = rng.normal(size=(n, c, h, w)).astype(dtype)
    weights = rng.normal(size=(o, c // groups, k, k)).astype(dtype)
    bias = rng.normal(size=(o,)).astype(dtype) if rng.integers(2) else None
    return x, ConvParams(weights=weights, bias=bias, stride=stride, padding=padding, groups=groups)


class TestConv2d:
    def test_all_ones_3x3(self):
        x = np.ones((1, 1, 3, 3), dtype=np.float32)
        p = ConvParams(weights=np.ones((1, 1, 3, 3), dtype=np.float32))
        out = ops.conv2d(x, p)
        assert out.shape == (1, 1, 1, 1)
        assert out[0, 0, 0, 0] == 9.0

    def test_identity_kernel(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(2, 1, 5, 5)).astype(np.float32)
        p = ConvParams(weights=np.ones((1, 1, 1, 1), dtype=np.float32))
        np.testing.assert_array_equal(ops.conv2d(x, p), x)

    def test_output_extent_contract(self):
        x = np.zeros((1, 1, 7, 5), dtype=np.float32)
        p = ConvParams(weights=np.zeros((1, 1, 3, 3), dtype=np.float32), stride=2, padding=1)
        assert ops.conv2d(x, p).shape == (1, 1, 4, 3)

    def test_shape_mismatch_names_both_shapes(self):
        x = np.zeros((1, 3, 5, 5), dtype=np.float32)
        p = ConvParams(weights=np.zeros((2, 4, 3, 3), dtype=np.float32))
        with pytest.raises(ShapeError) as err:
            ops.conv2d(x, p)
        assert "(1, 3, 5, 5)" in str(err.value) and "(2, 4, 3, 3)" in str(err.value)

    def test_kernel_does_not_fit(self):
        x = np.zeros((1, 1, 2, 2), dtype=np.float32)
        p = ConvParams(weights=np.zeros((1, 1, 3, 3), dtype=np.float32))
        with pytest.raises(ShapeError):
            ops.conv2d(x, p)

    def test_seeded_case_against_naive_oracle(self):
        rng = np.random.default_rng(42)
        x = rng.normal(size=(1, 2, 4, 4))
        w = rng.normal(size=(3, 2, 3, 3))
        p = ConvParams(weights=w, stride=1, padding=1)
        want = naive_conv2d(x, w, None, 1, 1, 1)
        np.testing.assert_allclose(ops.conv2d(x, p), want, atol=1e-6)

    @pytest.mark.parametrize("seed", range(30))
    def test_random_cases_both_precisions(self, seed):
        rng = np.random.default_rng(seed)
        for dtype, atol in ((np.float32, 1e-5), (np.float64, 1e-9)):
            x, p = random_conv_case(rng, dtype)
            want = naive_conv2d(
                x.astype(np.float64), p.weights.astype(np.float64),
                None if p.bias is None else p.bias.astype(np.float64),
                p.stride, p.padding, p.groups,
            )
            got = ops.conv2d(x, p)
            assert got.dtype == dtype
            assert np.abs(got - want).max() < atol

    def test_deterministic(self):
        rng = np.random.default_rng(7)
        x, p = random_conv_case(rng, np.float32)
        np.testing.assert_array_equal(ops.conv2d(x, p), ops.conv2d(x, p))

    def test_backends_agree(self):
        rng = np.random.default_rng(9)
        x, p = random_conv_case(rng, np.float64)
        original = backend.active_backend()
        try:
            backend.set_backend("numpy")
            a = ops.conv2d(x, p)
            if backend.HAS_NUMBA:
                backend.set_backend("numba")
                b = ops.conv2d(x, p)
                assert np.abs(a - b).max() < 1e-9
        finally:
            backend.set_backend(original)


class TestDepthwisePointwise:
    def test_channel_independence(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(1, 2, 5, 5)).astype(np.float32)
        x[:, 0] = 0.0
        w = rng.normal(size=(2, 1, 3, 3)).astype(np.float32)
        bias = np.asarray([0.5, -0.25], dtype=np.float32)
        p = ConvParams(weights=w, bias=bias, stride=1, padding=1, groups=2)
        out = ops.depthwise_conv2d(x, p)
        np.testing.assert_array_equal(out[:, 0], np.full_like(out[:, 0], 0.5))

    def test_all_ones_per_channel(self):
        x = np.ones((1, 2, 3, 3), dtype=np.float32)
        p = ConvParams(weights=np.ones((2, 1, 3, 3), dtype=np.float32), groups=2)
        out = ops.depthwise_conv2d(x, p)
        assert out.shape == (1, 2, 1, 1)
        np.testing.assert_array_equal(out.ravel(), [9.0, 9.0])

    def test_depthwise_equals_grouped_conv_bit_identical(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(2, 5, 6, 6)).astype(np.float32)
        p = ConvParams(weights=rng.normal(size=(5, 1, 3, 3)).astype(np.float32),
                       stride=1, padding=1, groups=5)
        np.testing.assert_array_equal(ops.depthwise_conv2d(x, p), ops.conv2d(x, p))

    def test_depthwise_rejects_non_depthwise(self):
        p = ConvParams(weights=np.zeros((2, 2, 3, 3), dtype=np.float32))
        with pytest.raises(ShapeError):
            ops.depthwise_conv2d(np.zeros((1, 4, 5, 5), dtype=np.float32), p)

    def test_pointwise_identity_mixing(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(1, 3, 4, 4)).astype(np.float32)
        p = ConvParams(weights=np.eye(3, dtype=np.float32).reshape(3, 3, 1, 1))
        np.testing.assert_array_equal(ops.pointwise_conv2d(x, p), x)

    def test_pointwise_mean_of_two_channels(self):
        x = np.empty((1, 2, 3, 3), dtype=np.float32)
        x[:, 0] = 2.0
        x[:, 1] = 4.0
        p = ConvParams(weights=np.full((1, 2, 1, 1), 0.5, dtype=np.float32))
        out = ops.pointwise_conv2d(x, p)
        np.testing.assert_array_equal(out, np.full((1, 1, 3, 3), 3.0, dtype=np.float32))

    def test_pointwise_equals_conv2d_bit_identical(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(2, 3, 4, 4)).astype(np.float32)
        p = ConvParams(weights=rng.normal(size=(5, 3, 1, 1)).astype(np.float32))
        np.testing.assert_array_equal(ops.pointwise_conv2d(x, p), ops.conv2d(x, p))

    def test_pointwise_rejects_larger_kernels(self):
        p = ConvParams(weights=np.zeros((1, 1, 3, 3), dtype=np.float32))
        with pytest.raises(ShapeError):
            ops.pointwise_conv2d(np.zeros((1, 1, 5, 5), dtype=np.float32), p)


class TestActivations:
    def test_relu6_clamps(self):
        x = np.asarray([[-3.0, 2.0, 9.0]])
        np.testing.assert_array_equal(ops.relu6(x), [[0.0, 2.0, 6.0]])

    def test_sigmoid_at_zero(self):
        assert ops.sigmoid(np.zeros(1))[0] == 0.5

    def test_sigmoid_range(self):
        x = np.linspace(-50, 50, 101)
        y = ops.sigmoid(x)
        assert (y > 0).all() and (y < 1).all()

    def test_softmax_uniform_logits(self):
        out = ops.softmax(np.zeros((1, 10)), axis=1)
        np.testing.assert_allclose(out, 0.1, rtol=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_softmax_sums_to_one_and_nonnegative(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.normal(scale=100, size=(4, 7))
        y = ops.softmax(x, axis=1)
        assert (y >= 0).all()
        np.testing.assert_allclose(y.sum(axis=1), 1.0, atol=1e-6)

    def test_softmax_extreme_logits_stable(self):
        x = np.asarray([[1e4, -1e4, 0.0]])
        y = ops.softmax(x, axis=1)
        assert np.isfinite(y).all()
        np.testing.assert_allclose(y.sum(), 1.0, atol=1e-6)


class TestBatchNorm:
    def test_mean_subtraction(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(2, 3, 4, 4))
        mean = x.mean(axis=(0, 2, 3))
        out = ops.batchnorm(
            x, np.ones(3), np.zeros(3), mean, np.ones(3) - 1e-5, training=False
        )
        np.testing.assert_allclose(out, x - mean.reshape(1, 3, 1, 1), atol=1e-7)

    def test_zero_scale_gives_shift(self):
        rng = np.random.default_rng(6)
        x = rng.normal(size=(2, 3, 4, 4))
        shift = np.asarray([1.0, -2.0, 0.5])
        out = ops.batchnorm(x, np.zeros(3), shift, np.zeros(3), np.ones(3), training=False)
        np.testing.assert_array_equal(out, np.broadcast_to(shift.reshape(1, 3, 1, 1), x.shape))

    def test_training_mode_matches_direct_summation_oracle(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=(3, 2, 5, 5))
        scale = rng.normal(size=2)
        shift = rng.normal(size=2)
        rm, rv = np.zeros(2), np.ones(2)
        got = ops.batchnorm(x, scale, shift, rm, rv, training=True)
        want = naive_batchnorm_train(x, scale, shift)
        assert np.abs(got - want).max() < 1e-6

    def test_training_updates_running_stats(self):
        rng = np.random.default_rng(8)
        x = rng.normal(loc=3.0, size=(4, 2, 3, 3))
        rm, rv = np.zeros(2), np.ones(2)
        ops.batchnorm(x, np.ones(2), np.zeros(2), rm, rv, training=True)
        np.testing.assert_allclose(rm, 0.1 * x.mean(axis=(0, 2, 3)), atol=1e-9)
        np.testing.assert_allclose(rv, 0.9 + 0.1 * x.var(axis=(0, 2, 3)), atol=1e-9)

    def test_inference_leaves_running_stats(self):
        rm, rv = np.zeros(2), np.ones(2)
        ops.batchnorm(np.ones((1, 2, 2, 2)), np.ones(2), np.zeros(2), rm, rv, training=False)
        np.testing.assert_array_equal(rm, np.zeros(2))
        np.testing.assert_array_equal(rv, np.ones(2))

    def test_length_mismatch_rejected(self):
        with pytest.raises(ShapeError):
            ops.batchnorm(np.zeros((1, 3, 2, 2)), np.ones(2), np.zeros(3), np.zeros(3), np.ones(3))


class TestPooling:
    def test_constant_tensor(self):
        x = np.full((1, 2, 4, 4), 2.5)
        np.testing.assert_array_equal(ops.global_avg_pool(x).ravel(), [2.5, 2.5])
        np.testing.assert_array_equal(ops.global_max_pool(x).ravel(), [2.5, 2.5])
        np.testing.assert_array_equal(ops.channel_avg(x), np.full((1, 1, 4, 4), 2.5))
        np.testing.assert_array_equal(ops.channel_max(x), np.full((1, 1, 4, 4), 2.5))

    def test_arithmetic_series_7x7(self):
        x = np.arange(49, dtype=np.float64).reshape(1, 1, 7, 7)
        assert ops.global_avg_pool(x)[0, 0, 0, 0] == 24.0
        assert ops.global_max_pool(x)[0, 0, 0, 0] == 48.0

    @pytest.mark.parametrize("seed", range(10))
    def test_seeded_against_direct_summation(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(2, 3, 5, 6))
        avg_want = np.zeros((2, 3))
        for b in range(2):
            for c in range(3):
                total = 0.0
                for i in range(5):
                    for j in range(6):
                        total += x[b, c, i, j]
                avg_want[b, c] = total / 30
        got = ops.global_avg_pool(x)
        assert np.abs(got.reshape(2, 3) - avg_want).max() < 1e-9
        np.testing.assert_array_equal(
            ops.global_max_pool(x).reshape(2, 3), x.max(axis=(2, 3))
        )

    def test_empty_axis_rejected(self):
        with pytest.raises(ShapeError):
            ops.global_avg_pool(np.zeros((1, 2, 0, 4)))
        with pytest.raises(ShapeError):
            ops.channel_max(np.zeros((1, 0, 4, 4)))

    def test_shapes(self):
        x = np.zeros((2, 3, 5, 7))
        assert ops.global_avg_pool(x).shape == (2, 3, 1, 1)
        assert ops.global_max_pool(x).shape == (2, 3, 1, 1)
        assert ops.channel_avg(x).shape == (2, 1, 5, 7)
        assert ops.channel_max(x).shape == (2, 1, 5, 7)


class TestLinear:
    def test_identity_weights(self):
        rng = np.random.default_rng(9)
        x = rng.normal(size=(3, 4))
        np.testing.assert_array_equal(ops.linear(x, np.eye(4), np.zeros(4)), x)

    def test_zero_weights_gives_bias(self):
        bias = np.asarray([1.0, 2.0])
        out = ops.linear(np.ones((3, 4)), np.zeros((4, 2)), bias)
        np.testing.assert_array_equal(out, np.tile(bias, (3, 1)))

    @pytest.mark.parametrize("seed", range(10))
    def test_seeded_against_naive_dot(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(3, 6))
        w = rng.normal(size=(6, 4))
        b = rng.normal(size=4)
        assert np.abs(ops.linear(x, w, b) - naive_linear(x, w, b)).max() < 1e-6

    def test_accepts_rank4_input(self):
        rng = np.random.default_rng(10)
        x = rng.normal(size=(2, 3, 1, 1))
        w = rng.normal(size=(3, 5))
        np.testing.assert_array_equal(ops.linear(x, w), x.reshape(2, 3) @ w)

    def test_feature_mismatch_rejected(self):
        with pytest.raises(ShapeError):
            ops.linear(np.zeros((2, 3)), np.zeros((4, 5)))
