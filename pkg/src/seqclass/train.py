"""Mini-batch training, evaluation and experiment reports."""

from __future__ import annotations

import dataclasses
import io
import csv
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import DEFAULT_MAX_LEN, Dataset, Vocabulary, encode_texts
from .nn import ModelConfig, ModelParams, backward, batch_loss, bce_loss, forward, init_params, predict_scores, score_to_prob
from .optim import Optimizer, OptimizerSpec
from .tensor import make_rng

log = logging.getLogger(__name__)

REPORT_COLUMNS = (
    "embed_units", "lstm_units", "vocab_size", "optimizer", "batch_size",
    "activation", "seed", "train_acc", "test_acc", "seconds", "status",
)


@dataclass(frozen=True)
class TrainingConfig:
    epochs: int = 10
    batch_size: int = 64
    optimizer: OptimizerSpec = field(default_factory=OptimizerSpec)
    seed: int = 0
    max_len: int = DEFAULT_MAX_LEN
    vocab_size: int | None = None
    embed_units: int = 128
    lstm_units: int = 128
    dropout: float = 0.5
    activation: str = "sigmoid"
    shuffle: bool = True

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")

    def model_config(self, vocab: Vocabulary) -> ModelConfig:
        if self.vocab_size is not None and self.vocab_size != vocab.size:
            raise ValueError(f"config vocab_size={self.vocab_size} but vocabulary has {vocab.size} tokens")
        return ModelConfig(vocab.size, self.embed_units, self.lstm_units, self.max_len,
                           self.dropout, self.activation)

    def replace(self, **changes) -> "TrainingConfig":
        """Like ``dataclasses.replace`` but also accepts ``optimizer`` as a kind
        name and the optimizer fields ``lr`` / ``clip_norm`` directly.
        Switching kind resets lr to that kind's default unless lr is given."""
        opt = self.optimizer
        kind = changes.pop("optimizer", None)
        if isinstance(kind, OptimizerSpec):
            opt = kind
        elif kind is not None and kind != opt.kind:
            opt = OptimizerSpec(kind, clip_norm=opt.clip_norm)
        for key in ("lr", "clip_norm"):
            if key in changes:
                opt = dataclasses.replace(opt, **{key: changes.pop(key)})
        return dataclasses.replace(self, optimizer=opt, **changes)

    def to_mapping(self) -> dict[str, object]:
        return {
            "epochs": self.epochs, "batch_size": self.batch_size,
            "optimizer": self.optimizer.kind, "lr": self.optimizer.learning_rate,
            "clip_norm": self.optimizer.clip_norm, "seed": self.seed, "max_len": self.max_len,
            "vocab_size": self.vocab_size, "embed_units": self.embed_units,
            "lstm_units": self.lstm_units, "dropout": self.dropout,
            "activation": self.activation, "shuffle": self.shuffle,
        }

    @classmethod
    def from_mapping(cls, values: dict[str, str]) -> "TrainingConfig":
        return cls().replace(**coerce_config_values(values))

    @classmethod
    def from_file(cls, path) -> "TrainingConfig":
        return cls.from_mapping(read_key_values(Path(path).read_text(encoding="utf-8")))


_INT_KEYS = {"epochs", "batch_size", "seed", "max_len", "vocab_size", "embed_units", "lstm_units"}
_FLOAT_KEYS = {"lr", "clip_norm", "dropout"}
_STR_KEYS = {"optimizer", "activation"}
_BOOL_KEYS = {"shuffle"}


def coerce_config_values(values: dict[str, str]) -> dict[str, object]:
    out: dict[str, object] = {}
    for key, raw in values.items():
        raw = raw.strip() if isinstance(raw, str) else raw
        if raw in ("", "none", "None"):
            out[key] = None
        elif key in _INT_KEYS:
            out[key] = int(raw)
        elif key in _FLOAT_KEYS:
            out[key] = float(raw)
        elif key in _STR_KEYS:
            out[key] = str(raw)
        elif key in _BOOL_KEYS:
            if str(raw).lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(f"{key}: expected a boolean, got {raw!r}")
            out[key] = str(raw).lower() in ("true", "1", "yes")
        else:
            raise ValueError(f"unknown config key {key!r}")
    return out


def read_key_values(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key] = value
    return values


@dataclass(frozen=True)
class Metrics:
    tp: int
    tn: int
    fp: int
    fn: int
    loss: float = float("nan")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total if self.total else float("nan")

    def __add__(self, other: "Metrics") -> "Metrics":
        n1, n2 = self.total, other.total
        loss = (self.loss * n1 + other.loss * n2) / (n1 + n2) if n1 + n2 else float("nan")
        return Metrics(self.tp + other.tp, self.tn + other.tn, self.fp + other.fp, self.fn + other.fn, loss)

    def summary(self) -> str:
        return (f"accuracy={self.accuracy:.4f} loss={self.loss:.4f} "
                f"tp={self.tp} tn={self.tn} fp={self.fp} fn={self.fn}")


def metrics_from_predictions(pred, labels, loss: float = float("nan")) -> Metrics:
    pred = np.asarray(pred, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    return Metrics(
        tp=int(np.sum((pred == 1) & (labels == 1))),
        tn=int(np.sum((pred == 0) & (labels == 0))),
        fp=int(np.sum((pred == 1) & (labels == 0))),
        fn=int(np.sum((pred == 0) & (labels == 1))),
        loss=loss,
    )


@dataclass
class Classifier:
    """Trained network parameters together with the vocabulary they index."""

    params: ModelParams
    vocab: Vocabulary

    @property
    def config(self) -> ModelConfig:
        return self.params.config

    def encode(self, texts) -> np.ndarray:
        return encode_texts(texts, self.vocab, self.config.max_len)

    def scores(self, texts) -> np.ndarray:
        return predict_scores(self.encode(texts), self.params)

    def labels_for(self, scores) -> np.ndarray:
        return (np.asarray(scores) >= self.config.threshold).astype(np.int64)


def evaluate(model: Classifier, data: Dataset) -> Metrics:
    if len(data) == 0:
        return Metrics(0, 0, 0, 0)
    scores = model.scores(data.texts)
    labels = data.labels
    loss = float(np.mean(bce_loss(score_to_prob(scores, model.config.activation), labels)))
    return metrics_from_predictions(model.labels_for(scores), labels, loss)


def predict(model: Classifier, text: str) -> tuple[float, int]:
    score = float(model.scores([text])[0])
    return score, int(score >= model.config.threshold)


@dataclass
class ExperimentReport:
    config: dict[str, object]
    epoch_losses: list[float]
    train: Metrics
    test: Metrics | None = None
    seconds: float = 0.0
    test_digest: str | None = None
    kind: str = "lstm"
    status: str = "ok"

    def row(self, include_time: bool = True) -> dict[str, str]:
        c = self.config
        return {
            "embed_units": str(c.get("embed_units", "")),
            "lstm_units": str(c.get("lstm_units", "")),
            "vocab_size": str(c.get("vocab_size", "")),
            "optimizer": str(c.get("optimizer", "")),
            "batch_size": str(c.get("batch_size", "")),
            "activation": str(c.get("activation", "")),
            "seed": str(c.get("seed", "")),
            "train_acc": f"{self.train.accuracy:.6f}",
            "test_acc": "" if self.test is None else f"{self.test.accuracy:.6f}",
            "seconds": f"{self.seconds:.2f}" if include_time else "",
            "status": self.status,
        }

    def to_csv(self, include_time: bool = True) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=REPORT_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerow(self.row(include_time))
        return buf.getvalue()

    def summary(self) -> str:
        lines = [f"model: {self.kind}"]
        lines += [f"  {k}: {v}" for k, v in self.config.items()]
        if self.epoch_losses:
            lines.append("epoch losses: " + " ".join(f"{x:.4f}" for x in self.epoch_losses))
        lines.append(f"train: {self.train.summary()}")
        if self.test is not None:
            lines.append(f"test:  {self.test.summary()}")
        lines.append(f"seconds: {self.seconds:.2f}")
        return "\n".join(lines)


def train_model(train: Dataset, config: TrainingConfig, vocab: Vocabulary,
                test: Dataset | None = None) -> tuple[Classifier, ExperimentReport]:
    """Fit a network on ``train``; evaluate on ``train`` (and ``test`` if given)."""
    if len(train) == 0:
        raise ValueError("empty training dataset")
    started = time.perf_counter()
    model_cfg = config.model_config(vocab)
    rng = make_rng(config.seed)
    params = init_params(model_cfg, rng)
    optimizer = Optimizer(config.optimizer)

    X = encode_texts(train.texts, vocab, config.max_len)
    y = train.labels
    n = len(y)
    epoch_losses = []
    for epoch in range(config.epochs):
        order = rng.permutation(n) if config.shuffle else np.arange(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            batch = order[start:start + config.batch_size]
            _, trace = forward(X[batch], params, mode="train", rng=rng)
            total += batch_loss(trace, y[batch]) * len(batch)
            optimizer.step(params.tensors, backward(trace, y[batch], params))
        epoch_losses.append(total / n)
        log.info("epoch %d/%d loss %.5f", epoch + 1, config.epochs, epoch_losses[-1])

    model = Classifier(params, vocab)
    train_metrics = evaluate(model, train)
    test_metrics = evaluate(model, test) if test is not None else None
    cfg_echo = config.to_mapping()
    cfg_echo["vocab_size"] = vocab.size
    report = ExperimentReport(
        config=cfg_echo,
        epoch_losses=epoch_losses,
        train=train_metrics,
        test=test_metrics,
        seconds=time.perf_counter() - started,
        test_digest=test.digest() if test is not None else None,
    )
    return model, report
