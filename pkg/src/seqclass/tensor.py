"""Dense array helpers, activations, seeded RNG and initializers.

Arrays are plain float64 numpy arrays. The RNG is numpy's PCG64 bit generator
(``np.random.Generator(np.random.PCG64(seed))``), whose stream is fixed for a
given seed across platforms.
"""

from __future__ import annotations

import numpy as np

DTYPE = np.float64


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def check_finite(x: np.ndarray, what: str = "tensor") -> np.ndarray:
    if not np.all(np.isfinite(x)):
        raise FloatingPointError(f"{what} contains NaN or Inf")
    return x


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=DTYPE)
    b = np.asarray(b, dtype=DTYPE)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValueError(f"cannot multiply shapes {a.shape} and {b.shape}")
    return check_finite(a @ b, "matmul result")


def sigmoid(x):
    x = np.asarray(x, dtype=DTYPE)
    # Split by sign so exp never overflows.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def tanh(x):
    return np.tanh(np.asarray(x, dtype=DTYPE))


_BINARY = {"add": np.add, "sub": np.subtract, "mul": np.multiply}
_UNARY = {"sigmoid": sigmoid, "tanh": tanh}


def elementwise(op: str, a, b=None) -> np.ndarray:
    """Apply ``add``/``sub``/``mul`` to two same-shaped arrays or
    ``sigmoid``/``tanh`` to one."""
    if op in _UNARY:
        return _UNARY[op](check_finite(np.asarray(a, dtype=DTYPE)))
    if op not in _BINARY:
        raise ValueError(f"unknown elementwise op {op!r}")
    a = np.asarray(a, dtype=DTYPE)
    b = np.asarray(b, dtype=DTYPE)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch for {op}: {a.shape} vs {b.shape}")
    return check_finite(_BINARY[op](a, b), f"{op} result")


def glorot_bound(fan_in: int, fan_out: int) -> float:
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


def init(kind: str, shape, rng: np.random.Generator | None = None, *,
         fan_in: int | None = None, fan_out: int | None = None,
         value: float = 0.0, scale: float | None = None) -> np.ndarray:
    """Create an initialized array.

    kind is one of ``zeros``, ``constant`` (uses ``value``), ``glorot_uniform``
    (fans default to the first/last dims of ``shape``) or ``uniform`` (``±scale``).
    """
    shape = tuple(shape)
    if kind == "zeros":
        return np.zeros(shape, dtype=DTYPE)
    if kind == "constant":
        return np.full(shape, value, dtype=DTYPE)
    if rng is None:
        raise ValueError(f"{kind} initialization needs an rng")
    if kind == "glorot_uniform":
        fan_in = shape[0] if fan_in is None else fan_in
        fan_out = shape[-1] if fan_out is None else fan_out
        bound = glorot_bound(fan_in, fan_out)
    elif kind == "uniform":
        if scale is None:
            raise ValueError("uniform initialization needs scale")
        bound = scale
    else:
        raise ValueError(f"unknown init kind {kind!r}")
    return rng.uniform(-bound, bound, size=shape).astype(DTYPE)
