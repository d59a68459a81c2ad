"""Tape mechanics: recording, accumulation, and the no-graph error."""

import numpy as np
import pytest

from lostnet.tensor import RecordingError, Tensor
from lostnet.tensor import autodiff as ad


def test_backward_without_recorded_forward_rejected():
    t = Tensor(np.ones((2, 2)))
    with pytest.raises(RecordingError):
        t.backward()


def test_backward_on_leaf_parameter_rejected():
    t = Tensor(np.ones(3), requires_grad=True)
    with pytest.raises(RecordingError):
        t.backward()


def test_untracked_inputs_build_no_graph():
    x = Tensor(np.ones((1, 4)))
    w = Tensor(np.ones((4, 2)))
    out = ad.linear(x, w)
    assert out._backward_fn is None
    with pytest.raises(RecordingError):
        out.backward()


def test_gradient_accumulates_over_shared_input():
    x = Tensor(np.asarray([[2.0, 3.0]]), requires_grad=True)
    y = ad.add(x, x)  # dy/dx = 2
    y.backward(np.ones((1, 2)))
    np.testing.assert_array_equal(x.grad, [[2.0, 2.0]])


def test_diamond_graph_accumulates_once_per_path():
    x = Tensor(np.asarray([[1.5]]), requires_grad=True)
    a = ad.mul(x, Tensor(np.asarray([[2.0]])))
    b = ad.mul(x, Tensor(np.asarray([[3.0]])))
    out = ad.add(a, b)
    out.backward(np.asarray([[1.0]]))
    np.testing.assert_array_equal(x.grad, [[5.0]])


def test_zero_grad_clears():
    x = Tensor(np.ones((1, 2)), requires_grad=True)
    out = ad.add(x, x)
    out.backward(np.ones((1, 2)))
    assert x.grad is not None
    x.zero_grad()
    assert x.grad is None


def test_frozen_weights_receive_no_grad_but_pass_gradient_through():
    rng = np.random.default_rng(0)
    x = Tensor(rng.normal(size=(1, 4)), requires_grad=True)
    w_frozen = Tensor(rng.normal(size=(4, 4)))  # requires_grad False
    w_train = Tensor(rng.normal(size=(4, 2)), requires_grad=True)
    out = ad.linear(ad.linear(x, w_frozen), w_train)
    out.backward(np.ones((1, 2)))
    assert w_frozen.grad is None
    assert w_train.grad is not None
    assert x.grad is not None


def test_forward_values_match_plain_ops():
    from lostnet.tensor import ops

    rng = np.random.default_rng(1)
    x = rng.normal(size=(2, 3, 5, 5))
    xt = Tensor(x, requires_grad=True)
    out = ad.relu6(xt)
    np.testing.assert_array_equal(out.data, ops.relu6(x))
