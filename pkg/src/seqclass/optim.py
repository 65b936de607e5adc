"""SGD, Adam, Adagrad and RMSprop update rules.

Defaults are the usual published values. ``Optimizer.step`` updates the
parameter arrays in place and keeps the embedding pad row at zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

KINDS = ("sgd", "adam", "adagrad", "rmsprop")
DEFAULT_LR = {"sgd": 0.01, "adam": 0.001, "adagrad": 0.01, "rmsprop": 0.001}


@dataclass(frozen=True)
class OptimizerSpec:
    kind: str = "adam"
    lr: float | None = None
    beta1: float = 0.9
    beta2: float = 0.999
    rho: float = 0.9
    eps: float | None = None
    clip_norm: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"optimizer must be one of {KINDS}, got {self.kind!r}")
        if self.clip_norm is not None and self.clip_norm <= 0:
            raise ValueError("clip_norm must be positive")

    @property
    def learning_rate(self) -> float:
        return DEFAULT_LR[self.kind] if self.lr is None else self.lr

    @property
    def epsilon(self) -> float:
        return 1e-8 if self.eps is None else self.eps


@dataclass
class OptimizerState:
    spec: OptimizerSpec
    t: int = 0
    # adam: m and v; adagrad: sum of squares; rmsprop: moving average of g^2
    slots: dict[str, dict[str, np.ndarray]] = field(default_factory=dict)


class Optimizer:
    def __init__(self, spec: OptimizerSpec | str = "adam", **kwargs):
        if isinstance(spec, str):
            spec = OptimizerSpec(spec, **kwargs)
        self.state = OptimizerState(spec)

    @property
    def spec(self) -> OptimizerSpec:
        return self.state.spec

    def _slot(self, slot: str, name: str, like: np.ndarray) -> np.ndarray:
        table = self.state.slots.setdefault(slot, {})
        if name not in table:
            table[name] = np.zeros_like(like)
        return table[name]

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        for name, g in grads.items():
            if name not in params:
                raise KeyError(f"gradient for unknown parameter {name!r}")
            if g.shape != params[name].shape:
                raise ValueError(f"{name}: gradient shape {g.shape} != parameter shape {params[name].shape}")
        spec = self.spec
        if spec.clip_norm is not None:
            grads = clip_by_global_norm(grads, spec.clip_norm)
        self.state.t += 1
        t = self.state.t
        lr, eps = spec.learning_rate, spec.epsilon
        for name, g in grads.items():
            theta = params[name]
            if spec.kind == "sgd":
                theta -= lr * g
            elif spec.kind == "adam":
                m = self._slot("m", name, theta)
                v = self._slot("v", name, theta)
                m *= spec.beta1
                m += (1.0 - spec.beta1) * g
                v *= spec.beta2
                v += (1.0 - spec.beta2) * g * g
                m_hat = m / (1.0 - spec.beta1 ** t)
                v_hat = v / (1.0 - spec.beta2 ** t)
                theta -= lr * m_hat / (np.sqrt(v_hat) + eps)
            elif spec.kind == "adagrad":
                acc = self._slot("sum_sq", name, theta)
                acc += g * g
                theta -= lr * g / np.sqrt(acc + eps)
            else:
                avg = self._slot("mean_sq", name, theta)
                avg *= spec.rho
                avg += (1.0 - spec.rho) * g * g
                theta -= lr * g / np.sqrt(avg + eps)
            if name == "embedding":
                theta[0] = 0.0


def clip_by_global_norm(grads: dict[str, np.ndarray], max_norm: float) -> dict[str, np.ndarray]:
    norm = float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))
    if norm <= max_norm:
        return grads
    scale = max_norm / norm
    return {k: g * scale for k, g in grads.items()}
