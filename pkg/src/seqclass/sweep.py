"""Grid sweeps over training hyperparameters, one CSV row per run.

A grid file uses the training-config ``key = value`` syntax; axis keys may list
several comma-separated values::

    embed_units = 16, 32, 64, 128
    lstm_units  = 32, 64
    optimizer   = adam, adagrad, rmsprop
    epochs      = 3          # fixed keys take one value
"""

from __future__ import annotations

import csv
import itertools
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .corpus import Vocabulary, build_vocabulary, load_tsv
from .train import REPORT_COLUMNS, TrainingConfig, coerce_config_values, read_key_values, train_model

log = logging.getLogger(__name__)

AXES = ("embed_units", "lstm_units", "vocab_size", "optimizer", "batch_size", "activation", "seed")
DEFAULT_VOCAB_SIZE = 20000
THREADS_ENV = "SEQCLASS_THREADS"


@dataclass(frozen=True)
class SweepGrid:
    axes: dict[str, tuple]  # axis name -> values, in AXES order
    fixed: dict[str, object]

    def __post_init__(self):
        for name, values in self.axes.items():
            if name not in AXES:
                raise ValueError(f"{name!r} is not a sweep axis")
            if not values:
                raise ValueError(f"axis {name!r} is empty")

    @property
    def size(self) -> int:
        n = 1
        for values in self.axes.values():
            n *= len(values)
        return n

    def points(self) -> list[dict[str, object]]:
        names = [a for a in AXES if a in self.axes]
        return [dict(zip(names, combo)) for combo in itertools.product(*(self.axes[a] for a in names))]

    @classmethod
    def from_text(cls, text: str) -> "SweepGrid":
        axes, fixed = {}, {}
        for key, raw in read_key_values(text).items():
            values = [v.strip() for v in raw.split(",")]
            coerced = [coerce_config_values({key: v})[key] for v in values]
            if key in AXES:
                axes[key] = tuple(coerced)
            elif len(coerced) != 1:
                raise ValueError(f"{key!r} is not a sweep axis and must hold a single value")
            else:
                fixed[key] = coerced[0]
        return cls({a: axes[a] for a in AXES if a in axes}, fixed)

    @classmethod
    def from_file(cls, path) -> "SweepGrid":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


def vocab_path(vocab_dir, size: int) -> Path:
    return Path(vocab_dir) / f"vocab_{size}.tsv"


def prepare_vocabularies(grid: SweepGrid, train_path, vocab_dir) -> dict[int, Path]:
    """Reuse ``vocab_<V>.tsv`` files in ``vocab_dir``; build missing ones from the train set."""
    sizes = grid.axes.get("vocab_size", (grid.fixed.get("vocab_size") or DEFAULT_VOCAB_SIZE,))
    Path(vocab_dir).mkdir(parents=True, exist_ok=True)
    paths = {}
    train = None
    for size in sizes:
        path = vocab_path(vocab_dir, size)
        if not path.exists():
            train = train if train is not None else load_tsv(train_path)
            build_vocabulary(train, size).save(path)
        paths[size] = path
    return paths


def run_point(point: dict, fixed: dict, train_path, test_path, vocab_file) -> dict[str, str]:
    """Train and evaluate one grid point. Failures become a row with a status."""
    started = time.perf_counter()
    values = {**fixed, **point}
    values.pop("vocab_size", None)
    try:
        config = TrainingConfig().replace(**values)
        vocab = Vocabulary.load(vocab_file)
        train = load_tsv(train_path)
        test = load_tsv(test_path) if test_path else None
        _, report = train_model(train, config, vocab, test)
        row = report.row()
    except Exception as exc:  # noqa: BLE001 - recorded per row
        log.warning("run %s failed: %s", point, exc)
        row = {col: "" for col in REPORT_COLUMNS}
        row.update({k: str(v) for k, v in point.items()})
        row["status"] = f"failed: {type(exc).__name__}: {exc}".replace("\n", " ")
    row["vocab_size"] = str(point.get("vocab_size", row["vocab_size"]))
    row["seconds"] = f"{time.perf_counter() - started:.2f}"
    return row


def max_workers(requested: int) -> int:
    cap = os.environ.get(THREADS_ENV)
    n = max(1, requested)
    if cap:
        n = min(n, max(1, int(cap)))
    return n


def run_sweep(grid: SweepGrid, train_path, test_path, vocab_dir, out, parallel: int = 1,
              timing: bool = True) -> list[dict[str, str]]:
    """Run every grid point and write the CSV to ``out`` as rows complete (in grid order)."""
    points = grid.points()
    log.info("sweep: %d runs", len(points))
    vocab_files = prepare_vocabularies(grid, train_path, vocab_dir)
    default_v = next(iter(vocab_files))
    jobs = [(p, grid.fixed, str(train_path), str(test_path) if test_path else None,
             str(vocab_files[p.get("vocab_size", default_v)])) for p in points]

    rows = []
    with open(out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=REPORT_COLUMNS, lineterminator="\n")
        writer.writeheader()
        fh.flush()

        def emit(row):
            if not timing:
                row["seconds"] = ""
            writer.writerow(row)
            fh.flush()
            rows.append(row)

        workers = max_workers(parallel)
        if workers == 1:
            for job in jobs:
                emit(run_point(*job))
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for row in pool.map(run_point, *zip(*jobs)):
                    emit(row)
    return rows
