"""Embedding -> LSTM -> Dropout -> Dense network with hand-written backprop.

All functions accept a single example (indices of shape ``(L,)``) or a batch
(``(B, L)``); internally everything runs batched.

LSTM step (h_0 = c_0 = 0)::

    i = sigmoid(x W_i + h U_i + b_i)      f = sigmoid(x W_f + h U_f + b_f)
    o = sigmoid(x W_o + h U_o + b_o)      g = tanh(x W_c + h U_c + b_c)
    c' = f * c + i * g                    h' = o * tanh(c')
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import EncodedMessage
from .tensor import DTYPE, init, sigmoid

GATES = ("i", "f", "c", "o")
PARAM_ORDER = (
    "embedding",
    "W_i", "U_i", "b_i",
    "W_f", "U_f", "b_f",
    "W_c", "U_c", "b_c",
    "W_o", "U_o", "b_o",
    "dense_w", "dense_b",
)
ACTIVATIONS = ("sigmoid", "tanh")
LOSS_EPS = 1e-7
EMBED_INIT_SCALE = 0.05
FORGET_BIAS = 1.0


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    embed_units: int = 128
    lstm_units: int = 128
    max_len: int = 50
    dropout: float = 0.5
    activation: str = "sigmoid"

    def __post_init__(self):
        if self.vocab_size < 1 or self.embed_units < 1 or self.lstm_units < 1 or self.max_len < 1:
            raise ValueError(f"sizes must be positive: {self}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must lie in [0, 1), got {self.dropout}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}, got {self.activation!r}")

    @property
    def threshold(self) -> float:
        return 0.5 if self.activation == "sigmoid" else 0.0

    def param_shapes(self) -> dict[str, tuple[int, ...]]:
        d_e, d_h = self.embed_units, self.lstm_units
        shapes = {"embedding": (self.vocab_size + 2, d_e)}
        for g in GATES:
            shapes[f"W_{g}"] = (d_e, d_h)
            shapes[f"U_{g}"] = (d_h, d_h)
            shapes[f"b_{g}"] = (d_h,)
        shapes["dense_w"] = (d_h, 1)
        shapes["dense_b"] = (1,)
        return shapes

    def n_params(self) -> int:
        return sum(int(np.prod(s)) for s in self.param_shapes().values())


class ModelParams:
    """Trainable tensors keyed by ``PARAM_ORDER`` names plus the architecture."""

    def __init__(self, config: ModelConfig, tensors: dict[str, np.ndarray]):
        shapes = config.param_shapes()
        if set(tensors) != set(shapes):
            raise ValueError(f"parameter names {sorted(tensors)} do not match {sorted(shapes)}")
        for name, shape in shapes.items():
            if tensors[name].shape != shape:
                raise ValueError(f"{name}: expected shape {shape}, got {tensors[name].shape}")
        self.config = config
        self.tensors = {name: np.asarray(tensors[name], dtype=DTYPE) for name in PARAM_ORDER}

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def copy(self) -> "ModelParams":
        return ModelParams(self.config, {k: v.copy() for k, v in self.tensors.items()})

    def stacked(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Gate weights concatenated column-wise in (i, f, c, o) order."""
        W = np.concatenate([self.tensors[f"W_{g}"] for g in GATES], axis=1)
        U = np.concatenate([self.tensors[f"U_{g}"] for g in GATES], axis=1)
        b = np.concatenate([self.tensors[f"b_{g}"] for g in GATES])
        return W, U, b


def zeros_params(config: ModelConfig) -> ModelParams:
    return ModelParams(config, {k: np.zeros(s, dtype=DTYPE) for k, s in config.param_shapes().items()})


def init_params(config: ModelConfig, rng: np.random.Generator) -> ModelParams:
    """Glorot-uniform W/U and dense weights, small uniform embeddings, forget bias 1."""
    d_e, d_h = config.embed_units, config.lstm_units
    t = {}
    emb = init("uniform", (config.vocab_size + 2, d_e), rng, scale=EMBED_INIT_SCALE)
    emb[0] = 0.0
    t["embedding"] = emb
    for g in GATES:
        t[f"W_{g}"] = init("glorot_uniform", (d_e, d_h), rng)
        t[f"U_{g}"] = init("glorot_uniform", (d_h, d_h), rng)
        t[f"b_{g}"] = init("constant", (d_h,), value=FORGET_BIAS if g == "f" else 0.0)
    t["dense_w"] = init("glorot_uniform", (d_h, 1), rng)
    t["dense_b"] = init("zeros", (1,))
    return ModelParams(config, t)


@dataclass
class LstmTrace:
    x: np.ndarray  # (B, L, d_e)
    i: np.ndarray  # (B, L, d_h) gate activations
    f: np.ndarray
    o: np.ndarray
    g: np.ndarray
    c: np.ndarray  # (B, L+1, d_h), c[:, 0] = c_0
    h: np.ndarray  # (B, L+1, d_h), h[:, 0] = h_0


@dataclass
class ForwardTrace:
    indices: np.ndarray  # (B, L)
    lstm: LstmTrace
    mask: np.ndarray  # (B, d_h), already scaled by 1/(1-p)
    h_drop: np.ndarray
    preact: np.ndarray  # (B,)
    score: np.ndarray  # (B,)
    activation: str


def _as_batch(indices) -> tuple[np.ndarray, bool]:
    if isinstance(indices, EncodedMessage):
        indices = indices.indices
    arr = np.asarray(indices, dtype=np.int64)
    if arr.ndim == 1:
        return arr[None, :], True
    if arr.ndim != 2:
        raise ValueError(f"indices must be 1-D or 2-D, got shape {arr.shape}")
    return arr, False


def embed_forward(indices, params: ModelParams) -> np.ndarray:
    idx, single = _as_batch(indices)
    table = params["embedding"]
    if idx.size and (idx.min() < 0 or idx.max() >= table.shape[0]):
        bad = idx[(idx < 0) | (idx >= table.shape[0])][0]
        raise IndexError(f"index {bad} outside embedding table of {table.shape[0]} rows")
    out = table[idx]
    return out[0] if single else out


def lstm_forward(x: np.ndarray, params: ModelParams) -> tuple[np.ndarray, LstmTrace]:
    """Run the recurrence over ``x`` of shape ``(L, d_e)`` or ``(B, L, d_e)``."""
    single = x.ndim == 2
    if single:
        x = x[None]
    B, L, _ = x.shape
    d_h = params.config.lstm_units
    W, U, b = params.stacked()
    xw = x @ W + b  # input contribution for all steps at once
    gates = np.empty((4, B, L, d_h), dtype=DTYPE)
    c = np.zeros((B, L + 1, d_h), dtype=DTYPE)
    h = np.zeros((B, L + 1, d_h), dtype=DTYPE)
    for t in range(L):
        z = xw[:, t] + h[:, t] @ U
        ifo = sigmoid(np.concatenate([z[:, :2 * d_h], z[:, 3 * d_h:]], axis=1))
        gi, gf, go = ifo[:, :d_h], ifo[:, d_h:2 * d_h], ifo[:, 2 * d_h:]
        gg = np.tanh(z[:, 2 * d_h:3 * d_h])
        c[:, t + 1] = gf * c[:, t] + gi * gg
        h[:, t + 1] = go * np.tanh(c[:, t + 1])
        gates[0, :, t], gates[1, :, t], gates[2, :, t], gates[3, :, t] = gi, gf, go, gg
    trace = LstmTrace(x, gates[0], gates[1], gates[2], gates[3], c, h)
    h_T = h[:, L]
    return (h_T[0] if single else h_T), trace


def dropout(h: np.ndarray, p: float, mode: str, rng: np.random.Generator | None = None,
            mask: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Inverted dropout: zero with probability p and scale survivors by 1/(1-p)
    in train mode, identity in infer mode. A given ``mask`` is reused as-is."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout rate must lie in [0, 1), got {p}")
    if mode == "infer":
        return h, np.ones_like(h)
    if mode != "train":
        raise ValueError(f"mode must be 'train' or 'infer', got {mode!r}")
    if mask is None:
        if rng is None:
            raise ValueError("train-mode dropout needs an rng or an explicit mask")
        mask = (rng.random(h.shape) >= p) / (1.0 - p)
    return h * mask, mask


def dense_forward(h: np.ndarray, params: ModelParams, activation: str = "sigmoid"):
    a = h @ params["dense_w"][:, 0] + params["dense_b"][0]
    if activation == "sigmoid":
        return sigmoid(a)
    if activation == "tanh":
        return np.tanh(a)
    raise ValueError(f"unknown activation {activation!r}")


def score_to_prob(score, activation: str):
    """tanh scores in (-1, 1) map onto (0, 1) before the loss."""
    return score if activation == "sigmoid" else (np.asarray(score) + 1.0) / 2.0


def bce_loss(p, y):
    p = np.clip(np.asarray(p, dtype=DTYPE), LOSS_EPS, 1.0 - LOSS_EPS)
    y = np.asarray(y, dtype=DTYPE)
    return -(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))


def forward(msg, params: ModelParams, mode: str = "infer", rng: np.random.Generator | None = None,
            mask: np.ndarray | None = None):
    """Full network pass. Returns ``(score, trace)``; the score is a float for a
    single message and an array for a batch."""
    idx, single = _as_batch(msg)
    cfg = params.config
    x = embed_forward(idx, params)
    h_T, lstm_trace = lstm_forward(x, params)
    h_drop, mask = dropout(h_T, cfg.dropout, mode, rng, mask)
    preact = h_drop @ params["dense_w"][:, 0] + params["dense_b"][0]
    score = sigmoid(preact) if cfg.activation == "sigmoid" else np.tanh(preact)
    trace = ForwardTrace(idx, lstm_trace, mask, h_drop, preact, score, cfg.activation)
    return (float(score[0]) if single else score), trace


def batch_loss(trace: ForwardTrace, y) -> float:
    y = np.atleast_1d(np.asarray(y, dtype=DTYPE))
    return float(np.mean(bce_loss(score_to_prob(trace.score, trace.activation), y)))


def backward(trace: ForwardTrace, y, params: ModelParams) -> dict[str, np.ndarray]:
    """Gradients of the batch-mean BCE loss w.r.t. every parameter tensor."""
    y = np.atleast_1d(np.asarray(y, dtype=DTYPE))
    lt = trace.lstm
    B, L, d_e = lt.x.shape
    d_h = params.config.lstm_units
    W, U, _ = params.stacked()

    # d loss / d preact: sigmoid+BCE gives p - y; tanh head through p=(1+s)/2 gives 2(p - y).
    p = score_to_prob(trace.score, trace.activation)
    da = (p - y) / B
    if trace.activation == "tanh":
        da = 2.0 * da

    grads = {"dense_w": (trace.h_drop.T @ da)[:, None], "dense_b": np.array([da.sum()])}
    dh = np.outer(da, params["dense_w"][:, 0]) * trace.mask
    dc = np.zeros((B, d_h), dtype=DTYPE)
    dz = np.empty((B, L, 4 * d_h), dtype=DTYPE)
    UT = U.T
    for t in range(L - 1, -1, -1):
        gi, gf, go, gg = lt.i[:, t], lt.f[:, t], lt.o[:, t], lt.g[:, t]
        tc = np.tanh(lt.c[:, t + 1])
        dc = dc + dh * go * (1.0 - tc * tc)
        dz[:, t, :d_h] = dc * gg * gi * (1.0 - gi)
        dz[:, t, d_h:2 * d_h] = dc * lt.c[:, t] * gf * (1.0 - gf)
        dz[:, t, 2 * d_h:3 * d_h] = dc * gi * (1.0 - gg * gg)
        dz[:, t, 3 * d_h:] = dh * tc * go * (1.0 - go)
        dh = dz[:, t] @ UT
        dc = dc * gf

    flat_dz = dz.reshape(B * L, 4 * d_h)
    dW = lt.x.reshape(B * L, d_e).T @ flat_dz
    dU = lt.h[:, :L].reshape(B * L, d_h).T @ flat_dz
    db = flat_dz.sum(axis=0)
    for k, g in enumerate(GATES):
        cols = slice(k * d_h, (k + 1) * d_h)
        grads[f"W_{g}"] = dW[:, cols]
        grads[f"U_{g}"] = dU[:, cols]
        grads[f"b_{g}"] = db[cols]

    dx = (flat_dz @ W.T).reshape(B, L, d_e)
    demb = np.zeros_like(params["embedding"])
    np.add.at(demb, trace.indices, dx)
    demb[0] = 0.0
    grads["embedding"] = demb
    return {name: grads[name] for name in PARAM_ORDER}


def predict_scores(indices: np.ndarray, params: ModelParams, batch_size: int = 256) -> np.ndarray:
    """Infer-mode scores for an ``(n, L)`` index array, in fixed-size chunks."""
    n = len(indices)
    out = np.empty(n, dtype=DTYPE)
    for start in range(0, n, batch_size):
        scores, _ = forward(indices[start:start + batch_size], params, mode="infer")
        out[start:start + batch_size] = scores
    return out
