import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from docstack.numerics import ops
from docstack.numerics.adam import Adam, AdamState, adam_step
from docstack.numerics.rng import Rng, derive_seed, splitmix64
from oracles import central_difference, conv2d_naive, maxpool_naive, rel_error


# -- rng -----------------------------------------------------------------------

def test_splitmix64_reference_value():
    _, out = splitmix64(0)
    assert out == 0xE220A8397B1DCDAF


def test_xoshiro_reference_value():
    r = Rng(0)
    r.state = [1, 2, 3, 4]
    assert r.next_u64() == 11520
    assert r.next_u64() == 0


def test_rng_streams_are_reproducible_and_keyed():
    a, b = Rng.for_key(7, "x"), Rng.for_key(7, "x")
    assert [a.next_u64() for _ in range(5)] == [b.next_u64() for _ in range(5)]
    assert derive_seed(7, "x") != derive_seed(7, "y")
    assert np.array_equal(Rng(3).normal_array((4, 5)), Rng(3).normal_array((4, 5)))


@given(st.integers(0, 2**64 - 1), st.integers(1, 300))
@settings(max_examples=40, deadline=None)
def test_permutation_is_a_permutation(seed, n):
    p = Rng(seed).permutation(n)
    assert sorted(p.tolist()) == list(range(n))


@given(st.integers(0, 2**64 - 1), st.integers(1, 1000))
@settings(max_examples=40, deadline=None)
def test_integers_in_range(seed, n):
    r = Rng(seed)
    assert all(0 <= r.integers(n) < n for _ in range(20))
    arr = r.integers_array(n, 50)
    assert arr.min() >= 0 and arr.max() < n


def test_uniform_array_moments():
    u = Rng(11).uniform_array(200000)
    assert 0.0 <= u.min() and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 0.005
    z = Rng(12).normal_array(200000)
    assert abs(z.mean()) < 0.01 and abs(z.std() - 1.0) < 0.01


# -- elementwise and dense -----------------------------------------------------

@given(st.lists(st.floats(-50, 50), min_size=2, max_size=12))
@settings(max_examples=60, deadline=None)
def test_softmax_is_a_distribution(values):
    p = ops.softmax(np.asarray(values)[None])
    assert np.all(p >= 0) and abs(p.sum() - 1.0) < 1e-12


def test_softmax_large_logits_and_nan():
    p = ops.softmax(np.array([[1000.0, 1000.0, -1000.0]]))
    assert np.allclose(p, [[0.5, 0.5, 0.0]])
    with pytest.raises(ops.NonFiniteError):
        ops.softmax(np.array([[np.nan, 1.0]]))


def test_relu_backward_zero_at_zero():
    x = np.array([-1.0, 0.0, 2.0])
    assert np.array_equal(ops.relu_backward(np.ones(3), x), [0.0, 0.0, 1.0])


def test_cross_entropy_gradient_matches_finite_difference():
    rng = np.random.default_rng(0)
    logits = rng.normal(size=(5, 4))
    y = np.array([0, 3, 1, 1, 2])
    g = ops.softmax_crossentropy_backward(ops.softmax(logits), y)
    num = central_difference(lambda: ops.cross_entropy(logits, y), logits)
    assert rel_error(g, num) < 1e-6


def test_dense_gradients():
    rng = np.random.default_rng(1)
    x, w, b = rng.normal(size=(3, 5)), rng.normal(size=(5, 4)), rng.normal(size=4)
    proj = rng.normal(size=(3, 4))
    loss = lambda: float(np.sum(ops.dense_forward(x, w, b) * proj))
    dx, dw, db = ops.dense_backward(proj, x, w)
    assert rel_error(dx, central_difference(loss, x)) < 1e-6
    assert rel_error(dw, central_difference(loss, w)) < 1e-6
    assert rel_error(db, central_difference(loss, b)) < 1e-6


# -- conv and pool -------------------------------------------------------------

@pytest.mark.parametrize("stride,pad", [(1, 0), (1, 1), (2, 1), (2, 0)])
def test_conv_forward_matches_naive(stride, pad):
    rng = np.random.default_rng(stride * 10 + pad)
    x = rng.normal(size=(2, 3, 7, 7))
    k = rng.normal(size=(4, 3, 3, 3))
    b = rng.normal(size=4)
    if (7 + 2 * pad - 3) % stride:
        with pytest.raises(ops.ShapeError):
            ops.conv2d_forward(x, k, b, stride, pad)
        return
    assert np.max(np.abs(ops.conv2d_forward(x, k, b, stride, pad) - conv2d_naive(x, k, b, stride, pad))) <= 1e-12


def test_conv_unbatched_and_channel_mismatch():
    rng = np.random.default_rng(5)
    x, k, b = rng.normal(size=(2, 5, 5)), rng.normal(size=(3, 2, 3, 3)), np.zeros(3)
    assert ops.conv2d_forward(x, k, b, 1, 1).shape == (3, 5, 5)
    with pytest.raises(ops.ShapeError):
        ops.conv2d_forward(x, rng.normal(size=(3, 4, 3, 3)), b)


def test_conv_single_pixel_identity_kernel():
    x = np.arange(16.0).reshape(1, 1, 4, 4)
    k = np.ones((1, 1, 1, 1))
    assert np.array_equal(ops.conv2d_forward(x, k, np.zeros(1)), x)


@pytest.mark.parametrize("stride,pad", [(1, 1), (2, 1)])
def test_conv_gradients_match_finite_differences(stride, pad):
    rng = np.random.default_rng(3)
    x = rng.normal(size=(2, 2, 5, 5))
    k = rng.normal(size=(3, 2, 3, 3))
    b = rng.normal(size=3)
    proj = rng.normal(size=ops.conv2d_forward(x, k, b, stride, pad).shape)
    loss = lambda: float(np.sum(ops.conv2d_forward(x, k, b, stride, pad) * proj))
    dx, dk, db = ops.conv2d_backward(proj, x, k, stride, pad)
    assert rel_error(dx, central_difference(loss, x)) <= 1e-4
    assert rel_error(dk, central_difference(loss, k)) <= 1e-4
    assert rel_error(db, central_difference(loss, b)) <= 1e-4


def test_maxpool_matches_naive_and_ties_go_first():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(2, 3, 6, 6))
    out, arg = ops.maxpool2d(x)
    ref, ref_arg = maxpool_naive(x)
    assert np.max(np.abs(out - ref)) <= 1e-12
    assert np.array_equal(arg, ref_arg)
    flat = np.ones((1, 1, 2, 2))
    _, idx = ops.maxpool2d(flat)
    assert idx.ravel()[0] == 0


def test_maxpool_gradient():
    rng = np.random.default_rng(6)
    x = rng.normal(size=(1, 2, 4, 4))
    proj = rng.normal(size=(1, 2, 2, 2))
    out, arg = ops.maxpool2d(x)
    loss = lambda: float(np.sum(ops.maxpool2d(x)[0] * proj))
    dx = ops.maxpool2d_backward(proj, arg, x.shape)
    assert rel_error(dx, central_difference(loss, x)) <= 1e-4


def test_maxpool_rejects_ragged_input():
    with pytest.raises(ops.ShapeError):
        ops.maxpool2d(np.zeros((1, 1, 5, 5)), 2, 2)


# -- adam ---------------------------------------------------------------------

def test_adam_first_step_is_alpha_times_sign():
    p = np.array([1.0, -2.0, 3.0])
    g = np.array([0.5, -4.0, 0.0])
    adam_step(p, g, AdamState(p.shape, alpha=0.1))
    assert np.allclose(p, [0.9, -1.9, 3.0])


def test_adam_rejects_nan_and_shape_mismatch():
    p = np.zeros(3)
    with pytest.raises(ops.NonFiniteError):
        adam_step(p, np.array([np.nan, 0, 0]), AdamState((3,)))
    with pytest.raises(ops.ShapeError):
        adam_step(p, np.zeros(4), AdamState((3,)))


def test_adam_minimises_quadratic():
    params = {"w": np.array([5.0, -3.0])}
    opt = Adam(params, alpha=0.1)
    for _ in range(500):
        opt.step(params, {"w": 2 * params["w"]})
    assert np.all(np.abs(params["w"]) < 1e-2)
