"""LSTM vs bag-of-words baselines on both synthetic tasks.

    python scripts/traditional_vs_lstm.py [--n 10000] [--out comparison.csv]

The keyword task is separable from word counts alone; the order task is not,
since both classes share one bag-of-words distribution.
"""

import argparse
import logging

from seqclass.baseline import baseline_report, compare, comparison_csv, train_baseline
from seqclass.corpus import build_vocabulary, gen_synthetic
from seqclass.train import TrainingConfig, train_model


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--n", type=int, default=10_000, help="training examples per task")
    parser.add_argument("--epochs", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", help="write the comparison CSV here as well")
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    config = TrainingConfig(epochs=args.epochs, max_len=20, embed_units=32, lstm_units=32, seed=args.seed)
    rows = []
    for task in ("keyword", "order"):
        train = gen_synthetic(task, args.n, 300, seed=args.seed + 1)
        test = gen_synthetic(task, args.n // 4, 300, seed=args.seed + 2)
        vocab = build_vocabulary(train, 200)
        _, lstm = train_model(train, config, vocab, test)
        for kind in ("logreg", "perceptron"):
            model = train_baseline(kind, train, vocab, epochs=args.epochs, seed=args.seed)
            rows.append(compare(lstm, baseline_report(model, train, test, args.epochs, args.seed), f"{task}/{kind}"))

    text = comparison_csv(rows)
    print(text, end="")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)


if __name__ == "__main__":
    main()
