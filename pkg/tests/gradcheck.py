"""Central finite-difference oracle for the network gradients."""

import numpy as np

from seqclass.nn import ModelConfig, backward, batch_loss, forward, init_params
from seqclass.tensor import make_rng

GRADCHECK_CONFIG = ModelConfig(vocab_size=20, embed_units=4, lstm_units=3, max_len=6, dropout=0.5)


def random_problem(seed, config=GRADCHECK_CONFIG, batch=3):
    """Random params (biases and weights perturbed away from init), padded
    messages and labels."""
    rng = make_rng(seed)
    params = init_params(config, rng)
    for name, t in params.tensors.items():
        if name != "embedding":
            t += rng.normal(0.0, 0.3, size=t.shape)
    idx = rng.integers(1, config.vocab_size + 2, size=(batch, config.max_len))
    for row in range(batch):
        idx[row, : rng.integers(0, config.max_len)] = 0
    y = rng.integers(0, 2, size=batch)
    return params, idx, y, rng


def numeric_grad(params, idx, y, mask, eps=1e-5):
    """d loss / d theta by central differences, dropout mask held fixed."""
    grads = {}
    for name, t in params.tensors.items():
        g = np.zeros_like(t)
        for pos in np.ndindex(t.shape):
            old = t[pos]
            t[pos] = old + eps
            plus = batch_loss(forward(idx, params, "train", mask=mask)[1], y)
            t[pos] = old - eps
            minus = batch_loss(forward(idx, params, "train", mask=mask)[1], y)
            t[pos] = old
            g[pos] = (plus - minus) / (2 * eps)
        grads[name] = g
    return grads


def relative_errors(analytic, numeric, floor=1e-6):
    """Elementwise |a - n| / max(|a| + |n|, floor), per tensor."""
    return {k: np.abs(analytic[k] - numeric[k]) / np.maximum(np.abs(analytic[k]) + np.abs(numeric[k]), floor)
            for k in analytic}


def check(seed, config=GRADCHECK_CONFIG):
    params, idx, y, rng = random_problem(seed, config)
    _, trace = forward(idx, params, "train", rng=rng)
    analytic = backward(trace, y, params)
    numeric = numeric_grad(params, idx, y, trace.mask)
    # The pad row is frozen, not a trainable parameter.
    numeric["embedding"][0] = 0.0
    return analytic, relative_errors(analytic, numeric)
