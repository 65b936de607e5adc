"""Bag-of-words logistic regression and averaged perceptron baselines.

Feature 0 is a constant bias; features 1..V count vocabulary tokens and V+1
counts out-of-vocabulary tokens.
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .corpus import Dataset, Vocabulary, tokenize
from .tensor import make_rng, sigmoid
from .train import ExperimentReport, Metrics, metrics_from_predictions

KINDS = ("logreg", "perceptron")
LOGREG_LR = 0.1


@dataclass(frozen=True)
class BowVector:
    indices: np.ndarray  # sorted feature indices in [1, V+1]
    counts: np.ndarray

    def as_dict(self) -> dict[int, int]:
        return {int(i): int(c) for i, c in zip(self.indices, self.counts)}


def featurize(tokens, vocab: Vocabulary) -> BowVector:
    counts = Counter(vocab.index(t) for t in tokens)
    idx = np.array(sorted(counts), dtype=np.int64)
    return BowVector(idx, np.array([counts[i] for i in idx], dtype=np.float64))


@dataclass
class LinearModel:
    kind: str
    weights: np.ndarray  # (V+2,), weights[0] is the bias
    vocab: Vocabulary

    def margin(self, x: BowVector) -> float:
        return float(self.weights[0] + self.weights[x.indices] @ x.counts)

    def margins(self, texts) -> np.ndarray:
        return np.array([self.margin(featurize(tokenize(t), self.vocab)) for t in texts])

    def predict(self, texts) -> np.ndarray:
        return (self.margins(texts) >= 0).astype(np.int64)


def train_baseline(kind: str, train: Dataset, vocab: Vocabulary, epochs: int = 10, seed: int = 0) -> LinearModel:
    """Per-example SGD on logistic loss (``logreg``) or averaged perceptron updates."""
    if kind not in KINDS:
        raise ValueError(f"baseline kind must be one of {KINDS}, got {kind!r}")
    if len(train) == 0:
        raise ValueError("empty training dataset")
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    rng = make_rng(seed)
    feats = [featurize(tokenize(t), vocab) for t in train.texts]
    y = train.labels
    n_features = vocab.size + 2
    w = np.zeros(n_features)

    if kind == "logreg":
        for _ in range(epochs):
            for k in rng.permutation(len(feats)):
                x = feats[k]
                z = w[0] + w[x.indices] @ x.counts
                g = float(sigmoid(z)) - y[k]
                w[x.indices] -= LOGREG_LR * g * x.counts
                w[0] -= LOGREG_LR * g
        return LinearModel(kind, w, vocab)

    # Averaged perceptron with the lazy-sum trick: avg = w - u / c.
    u = np.zeros(n_features)
    c = 1
    sign = 2 * y - 1
    for _ in range(epochs):
        for k in rng.permutation(len(feats)):
            x = feats[k]
            if sign[k] * (w[0] + w[x.indices] @ x.counts) <= 0:
                w[x.indices] += sign[k] * x.counts
                w[0] += sign[k]
                u[x.indices] += c * sign[k] * x.counts
                u[0] += c * sign[k]
            c += 1
    return LinearModel(kind, w - u / c, vocab)


def evaluate_baseline(model: LinearModel, data: Dataset) -> Metrics:
    if len(data) == 0:
        return Metrics(0, 0, 0, 0)
    margins = model.margins(data.texts)
    loss = float("nan")
    if model.kind == "logreg":
        p = np.clip(sigmoid(margins), 1e-7, 1 - 1e-7)
        y = data.labels
        loss = float(np.mean(-(y * np.log(p) + (1 - y) * np.log(1 - p))))
    return metrics_from_predictions((margins >= 0).astype(np.int64), data.labels, loss)


def baseline_report(model: LinearModel, train: Dataset, test: Dataset | None, epochs: int, seed: int) -> ExperimentReport:
    return ExperimentReport(
        config={"vocab_size": model.vocab.size, "optimizer": model.kind, "epochs": epochs, "seed": seed},
        epoch_losses=[],
        train=evaluate_baseline(model, train),
        test=evaluate_baseline(model, test) if test is not None else None,
        test_digest=test.digest() if test is not None else None,
        kind=model.kind,
    )


@dataclass(frozen=True)
class ComparisonRow:
    task: str
    traditional: float
    lstm: float

    @property
    def delta(self) -> float:
        return self.lstm - self.traditional


def compare(lstm_report: ExperimentReport, baseline: ExperimentReport, task: str = "") -> ComparisonRow:
    """Pair test accuracies of an LSTM run and a baseline run on the same test set."""
    if lstm_report.test is None or baseline.test is None:
        raise ValueError("both reports need test metrics")
    if lstm_report.test_digest is None or lstm_report.test_digest != baseline.test_digest:
        raise ValueError("reports were evaluated on different test sets")
    return ComparisonRow(task, baseline.test.accuracy, lstm_report.test.accuracy)


def comparison_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["task", "traditional_acc", "lstm_acc", "delta"])
    for r in rows:
        writer.writerow([r.task, f"{r.traditional:.4f}", f"{r.lstm:.4f}", f"{r.delta:+.4f}"])
    return buf.getvalue()
