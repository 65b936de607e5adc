import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from seqclass.optim import KINDS, Optimizer, OptimizerSpec, clip_by_global_norm

# mpmath, 30 digits.
ADAM_FIRST_STEP = -0.000999999980000000399999992  # -0.001 * 0.5 / (0.5 + 1e-8)
ADAGRAD_FIRST_STEP = 0.00999999999444444444907407406979  # 0.01 * 3 / sqrt(9 + 1e-8)
RMSPROP_FIRST_STEP = 0.0031622776206399093210529630556  # 0.001 * 2 / sqrt(0.1 * 4 + 1e-8)


def one_step(kind, theta, g, **kw):
    params = {"x": np.array([theta], dtype=float)}
    Optimizer(kind, **kw).step(params, {"x": np.array([g], dtype=float)})
    return params["x"][0]


def test_sgd_step():
    assert one_step("sgd", 1.0, 2.0, lr=0.1) == pytest.approx(0.8, abs=1e-15)


def test_adam_first_step():
    assert one_step("adam", 0.0, 0.5) == pytest.approx(ADAM_FIRST_STEP, rel=1e-12)


def test_adagrad_first_step():
    assert 3.0 - one_step("adagrad", 3.0, 3.0) == pytest.approx(ADAGRAD_FIRST_STEP, rel=1e-12)


def test_rmsprop_first_step():
    assert -one_step("rmsprop", 0.0, 2.0) == pytest.approx(RMSPROP_FIRST_STEP, rel=1e-12)


def test_defaults():
    assert OptimizerSpec("adam").learning_rate == 0.001
    assert OptimizerSpec("adagrad").learning_rate == 0.01
    assert OptimizerSpec("rmsprop").learning_rate == 0.001
    spec = OptimizerSpec("adam")
    assert (spec.beta1, spec.beta2, spec.epsilon, spec.rho) == (0.9, 0.999, 1e-8, 0.9)
    with pytest.raises(ValueError):
        OptimizerSpec("momentum")


def test_adam_two_steps_by_hand():
    # Constant gradient: bias-corrected moments stay at g and g^2.
    params = {"x": np.zeros(1)}
    opt = Optimizer("adam")
    for _ in range(2):
        opt.step(params, {"x": np.array([0.5])})
    assert params["x"][0] == pytest.approx(2 * ADAM_FIRST_STEP, rel=1e-9)
    assert opt.state.t == 2


arrays = hnp.arrays(np.float64, st.integers(1, 6), elements=st.floats(-10, 10))


@pytest.mark.parametrize("kind", KINDS)
@given(theta=arrays)
def test_zero_gradient_leaves_params_unchanged(kind, theta):
    params = {"x": theta.copy()}
    Optimizer(kind).step(params, {"x": np.zeros_like(theta)})
    assert np.array_equal(params["x"], theta)


@given(arrays)
def test_adam_first_step_bounded_by_lr(g):
    params = {"x": np.zeros_like(g)}
    Optimizer("adam").step(params, {"x": g})
    assert np.all(np.abs(params["x"]) <= 0.001 * (1 + 1e-9))


@pytest.mark.parametrize("kind", KINDS)
def test_step_is_deterministic(kind):
    rng = np.random.default_rng(0)
    theta = rng.normal(size=(3, 4))
    grads = [rng.normal(size=(3, 4)) for _ in range(3)]
    results = []
    for _ in range(2):
        params = {"x": theta.copy()}
        opt = Optimizer(kind)
        for g in grads:
            opt.step(params, {"x": g})
        results.append(params["x"])
    assert np.array_equal(*results)


@pytest.mark.parametrize("kind", KINDS)
def test_pad_row_never_updated(kind):
    params = {"embedding": np.zeros((4, 2))}
    g = np.ones((4, 2))
    Optimizer(kind).step(params, {"embedding": g})
    assert np.all(params["embedding"][0] == 0.0)
    assert np.all(params["embedding"][1:] != 0.0)


def test_shape_mismatch():
    with pytest.raises(ValueError, match="shape"):
        Optimizer("sgd").step({"x": np.zeros(3)}, {"x": np.zeros(2)})


def test_clip_by_global_norm():
    grads = {"a": np.array([3.0]), "b": np.array([4.0])}
    clipped = clip_by_global_norm(grads, 1.0)
    assert clipped["a"][0] == pytest.approx(0.6) and clipped["b"][0] == pytest.approx(0.8)
    assert clip_by_global_norm(grads, 10.0) is grads
    params = {"x": np.zeros(1)}
    Optimizer("sgd", lr=1.0, clip_norm=1.0).step(params, {"x": np.array([5.0])})
    assert params["x"][0] == pytest.approx(-1.0)
