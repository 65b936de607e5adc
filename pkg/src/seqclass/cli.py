"""Command-line entry point: ``seqclass <command> ...``.

Exit codes: 0 success, 1 run failure, 2 usage or input error.
"""

from __future__ import annotations

import os

# Training runs single-threaded for bit-reproducibility.
for _var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import model_io
from .corpus import Vocabulary, balanced_sample, build_vocabulary, gen_synthetic, load_tsv, save_tsv, split
from .sweep import SweepGrid, run_sweep
from .train import TrainingConfig, evaluate, train_model

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2
DEFAULT_LABELS = "NON-ACTIONABLE,ACTIONABLE"
DEFAULT_MAX_VOCAB = 20000


class UsageError(Exception):
    pass


def format_score(score: float) -> str:
    return np.format_float_positional(score, precision=4, trim="-")


def cmd_build_vocab(args) -> int:
    vocab = build_vocabulary(load_tsv(args.input), args.max_vocab)
    vocab.save(args.out)
    print(f"wrote {vocab.size} tokens to {args.out}")
    return EXIT_OK


def _training_config(args) -> TrainingConfig:
    config = TrainingConfig.from_file(args.config) if args.config else TrainingConfig()
    overrides = {
        "embed_units": args.embed_units, "lstm_units": args.lstm_units, "dropout": args.dropout,
        "optimizer": args.optimizer, "lr": args.lr, "clip_norm": args.clip_norm,
        "batch_size": args.batch_size, "epochs": args.epochs, "max_len": args.max_len,
        "activation": args.activation, "seed": args.seed,
    }
    return config.replace(**{k: v for k, v in overrides.items() if v is not None})


def cmd_train(args) -> int:
    config = _training_config(args)
    train = load_tsv(args.train)
    test = load_tsv(args.test) if args.test else None
    if args.vocab:
        vocab = Vocabulary.load(args.vocab)
    else:
        vocab = build_vocabulary(train, args.max_vocab or config.vocab_size or DEFAULT_MAX_VOCAB)
    try:
        config.model_config(vocab)
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    model, report = train_model(train, config, vocab, test)
    out = Path(args.out)
    model_io.save(model, out, optimizer={"kind": config.optimizer.kind, "lr": config.optimizer.learning_rate,
                                         "clip_norm": config.optimizer.clip_norm},
                  seed=config.seed)
    (out / "report.csv").write_text(report.to_csv(include_time=args.timing), encoding="utf-8", newline="\n")
    print(report.summary())
    return EXIT_OK


def cmd_eval(args) -> int:
    model = model_io.load(args.model)
    metrics = evaluate(model, load_tsv(args.data))
    print(metrics.summary())
    return EXIT_OK


def cmd_predict(args) -> int:
    names = [s.strip() for s in args.labels.split(",")]
    if len(names) != 2:
        raise UsageError("--labels needs exactly two comma-separated names (label 0, label 1)")
    model = model_io.load(args.model)
    texts = list(args.text or [])
    if args.stdin:
        texts += sys.stdin.read().splitlines()
    if not texts:
        return EXIT_OK
    scores = model.scores(texts)
    for score, label in zip(scores, model.labels_for(scores)):
        print(f"{format_score(float(score))}\t{names[label]}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    grid = SweepGrid.from_file(args.grid)
    print(f"sweep: {grid.size} runs", file=sys.stderr)
    rows = run_sweep(grid, args.train, args.test, args.vocab_dir, args.out, args.parallel, timing=not args.no_timing)
    failed = sum(r["status"] != "ok" for r in rows)
    print(f"wrote {len(rows)} rows to {args.out} ({failed} failed)", file=sys.stderr)
    return EXIT_FAILURE if failed else EXIT_OK


def cmd_gen_synth(args) -> int:
    save_tsv(gen_synthetic(args.task, args.n, args.vocab_size, args.seed), args.out)
    return EXIT_OK


def cmd_split(args) -> int:
    data = load_tsv(args.input)
    if args.balanced:
        data = balanced_sample(data, args.seed)
    train, test = split(data, args.ratio, args.seed)
    save_tsv(train, args.out_train)
    save_tsv(test, args.out_test)
    print(f"train: {len(train)} rows, test: {len(test)} rows")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seqclass", description="LSTM text-sequence classifier")
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-epoch progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-vocab", help="build a vocabulary TSV from a dataset")
    p.add_argument("--input", required=True)
    p.add_argument("--max-vocab", type=int, default=DEFAULT_MAX_VOCAB)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_vocab)

    p = sub.add_parser("train", help="train a model and save a bundle")
    p.add_argument("--train", required=True)
    p.add_argument("--test")
    p.add_argument("--vocab", help="vocabulary TSV; built from --train when omitted")
    p.add_argument("--max-vocab", type=int, help="vocabulary size when building one")
    p.add_argument("--config", help="key = value training config file; flags override it")
    p.add_argument("--embed-units", type=int)
    p.add_argument("--lstm-units", type=int)
    p.add_argument("--dropout", type=float)
    p.add_argument("--optimizer", choices=("sgd", "adam", "adagrad", "rmsprop"))
    p.add_argument("--lr", type=float)
    p.add_argument("--clip-norm", type=float, help="max global gradient norm (off by default)")
    p.add_argument("--batch-size", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--max-len", type=int)
    p.add_argument("--activation", choices=("sigmoid", "tanh"))
    p.add_argument("--seed", type=int)
    p.add_argument("--timing", action="store_true", help="record wall-clock seconds in report.csv")
    p.add_argument("--out", required=True, help="bundle directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="print metrics of a model on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="print score<TAB>LABEL per message")
    p.add_argument("--model", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--text", action="append")
    src.add_argument("--stdin", action="store_true")
    p.add_argument("--labels", default=DEFAULT_LABELS, help="names for label 0 and label 1")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("sweep", help="train every point of a hyperparameter grid")
    p.add_argument("--grid", required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--test")
    p.add_argument("--vocab-dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--parallel", type=int, default=1)
    p.add_argument("--no-timing", action="store_true", help="leave the seconds column empty")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen-synth", help="write a synthetic dataset")
    p.add_argument("--task", choices=("keyword", "order"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--vocab-size", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_synth)

    p = sub.add_parser("split", help="optionally balance, then split a dataset")
    p.add_argument("--input", required=True)
    p.add_argument("--ratio", type=float, default=0.8)
    p.add_argument("--balanced", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-train", required=True)
    p.add_argument("--out-test", required=True)
    p.set_defaults(func=cmd_split)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
