import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from seqclass.tensor import elementwise, glorot_bound, init, make_rng, matmul, sigmoid

# 1 / (1 + e^-1.5) evaluated with mpmath at 30 digits.
SIGMOID_1_5 = 0.817574476193643659607217178656


def test_matmul_examples():
    assert np.array_equal(matmul([[1, 0], [0, 1]], [[5], [7]]), [[5], [7]])
    assert np.array_equal(matmul([[1, 2]], [[3], [4]]), [[11]])


def test_matmul_shape_error_names_shapes():
    with pytest.raises(ValueError, match=r"\(2, 3\).*\(2, 2\)"):
        matmul(np.ones((2, 3)), np.ones((2, 2)))


@given(hnp.arrays(np.float64, hnp.array_shapes(min_dims=2, max_dims=2, max_side=5),
                  elements=st.floats(-1e3, 1e3)))
def test_identity_is_neutral(a):
    assert np.array_equal(matmul(np.eye(a.shape[0]), a), a)
    assert np.array_equal(matmul(a, np.eye(a.shape[1])), a)


def test_activations():
    assert elementwise("sigmoid", 0.0) == 0.5
    assert elementwise("tanh", 0.0) == 0.0
    assert elementwise("sigmoid", 1.5) == pytest.approx(SIGMOID_1_5, rel=1e-15)


def test_binary_ops():
    a, b = np.array([1.0, 2.0]), np.array([3.0, 5.0])
    assert np.array_equal(elementwise("add", a, b), [4, 7])
    assert np.array_equal(elementwise("sub", a, b), [-2, -3])
    assert np.array_equal(elementwise("mul", a, b), [3, 10])
    with pytest.raises(ValueError, match="shape mismatch"):
        elementwise("add", a, np.ones(3))


def test_non_finite_rejected():
    with pytest.raises(FloatingPointError):
        elementwise("sigmoid", np.array([np.nan]))
    with pytest.raises(FloatingPointError):
        matmul([[np.inf]], [[1.0]])


@given(st.floats(-30, 30))
def test_sigmoid_range_and_symmetry(x):
    s = float(sigmoid(x))
    assert 0.0 < s < 1.0
    assert abs(float(sigmoid(-x)) - (1.0 - s)) <= 2 * np.finfo(float).eps
    assert -1.0 < float(elementwise("tanh", x / 10)) < 1.0


def test_sigmoid_extremes_do_not_overflow():
    with np.errstate(over="raise"):
        out = sigmoid(np.array([-800.0, 800.0]))
    assert out[0] == 0.0 and out[1] == 1.0


def test_init_kinds():
    assert np.array_equal(init("zeros", (2, 2)), np.zeros((2, 2)))
    assert np.array_equal(init("constant", (3,), value=1.0), np.ones(3))
    assert glorot_bound(3, 3) == 1.0


@given(st.integers(1, 40), st.integers(1, 40), st.integers(0, 2**32 - 1))
def test_glorot_samples_inside_bound(fan_in, fan_out, seed):
    w = init("glorot_uniform", (fan_in, fan_out), make_rng(seed))
    assert np.all(np.abs(w) < glorot_bound(fan_in, fan_out))


def test_same_seed_same_matrix():
    a = init("glorot_uniform", (4, 5), make_rng(11))
    b = init("glorot_uniform", (4, 5), make_rng(11))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, init("glorot_uniform", (4, 5), make_rng(12)))


def test_rng_stream_is_pinned():
    # PCG64 output for seed 0 is part of the reproducibility contract.
    assert make_rng(0).random() == 0.6369616873214543
