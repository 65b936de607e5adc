"""Tokenization, vocabulary, integer encoding, and dataset handling."""

from __future__ import annotations

import hashlib
import re
from collections import Counter
from dataclasses import dataclass, field
from decimal import ROUND_FLOOR, Decimal
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

PAD_INDEX = 0
DEFAULT_MAX_LEN = 50

# URLs, @mentions and #hashtags stay whole; other punctuation is split per char.
_TOKEN_RE = re.compile(
    r"(?:[a-z][a-z0-9+.\-]*://|www\.)\S+"
    r"|[@#]\w+"
    r"|\w+"
    r"|[^\w\s]"
)

TRIGGER_LEXICON = ("refund", "broken", "help", "cancel", "outage")
ORDER_MARKERS = ("alpha", "beta")


def tokenize(text: str) -> list[str]:
    """Split ``text`` into lowercased tokens.

    Whitespace separates tokens and each punctuation character becomes its own
    token, except inside @mentions, #hashtags and URLs (``scheme://`` or
    ``www.`` prefixed), which are kept whole.
    """
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class LabeledExample:
    label: int
    text: str
    language: str | None = None

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")


@dataclass(frozen=True)
class Dataset:
    examples: tuple[LabeledExample, ...]
    provenance: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "examples", tuple(self.examples))

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self):
        return iter(self.examples)

    @property
    def labels(self) -> np.ndarray:
        return np.array([ex.label for ex in self.examples], dtype=np.int64)

    @property
    def texts(self) -> list[str]:
        return [ex.text for ex in self.examples]

    def digest(self) -> str:
        """sha256 of the TSV serialization; identifies a dataset by content."""
        return hashlib.sha256(_dump_tsv(self).encode("utf-8")).hexdigest()


class Vocabulary:
    """Frequency-ranked token index.

    Index 0 is padding, 1..V are tokens in descending frequency (ties broken by
    UTF-8 byte order), and V+1 is the shared out-of-vocabulary index.
    """

    def __init__(self, tokens: Sequence[str], frequencies: Sequence[int]):
        if len(tokens) != len(frequencies):
            raise ValueError("tokens and frequencies differ in length")
        if len(tokens) == 0:
            raise ValueError("vocabulary must hold at least one token")
        self.tokens = tuple(tokens)
        self.frequencies = tuple(int(f) for f in frequencies)
        self._index = {tok: i + 1 for i, tok in enumerate(self.tokens)}
        if len(self._index) != len(self.tokens):
            raise ValueError("duplicate tokens in vocabulary")

    @property
    def size(self) -> int:
        return len(self.tokens)

    @property
    def pad_index(self) -> int:
        return PAD_INDEX

    @property
    def oov_index(self) -> int:
        return self.size + 1

    def __len__(self) -> int:
        return self.size

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def __eq__(self, other) -> bool:
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return self.tokens == other.tokens and self.frequencies == other.frequencies

    def __repr__(self) -> str:
        return f"Vocabulary(size={self.size})"

    def index(self, token: str) -> int:
        return self._index.get(token, self.oov_index)

    def entries(self) -> list[tuple[str, int, int]]:
        return [(tok, i + 1, f) for i, (tok, f) in enumerate(zip(self.tokens, self.frequencies))]

    @classmethod
    def from_dict(cls, mapping: dict[str, int]) -> "Vocabulary":
        """Build from an explicit ``token -> index`` map; gaps are filled with
        placeholder tokens so that indices are preserved exactly."""
        size = max(mapping.values())
        tokens = [f"<unused{i}>" for i in range(1, size + 1)]
        for tok, idx in mapping.items():
            if idx < 1:
                raise ValueError(f"token index must be positive: {tok!r} -> {idx}")
            tokens[idx - 1] = tok
        return cls(tokens, [0] * size)

    def to_tsv(self) -> str:
        lines = [f"#V={self.size}"]
        lines += [f"{tok}\t{idx}\t{freq}" for tok, idx, freq in self.entries()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_tsv(cls, text: str) -> "Vocabulary":
        lines = text.split("\n")
        if not lines or not lines[0].startswith("#V="):
            raise ValueError("vocabulary file must start with '#V=<n>'")
        size = int(lines[0][3:])
        tokens, freqs = [], []
        for lineno, line in enumerate(lines[1:], start=2):
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"line {lineno}: expected token<TAB>index<TAB>frequency")
            tok, idx, freq = parts[0], int(parts[1]), int(parts[2])
            if idx != len(tokens) + 1:
                raise ValueError(f"line {lineno}: index {idx} out of order")
            tokens.append(tok)
            freqs.append(freq)
        if len(tokens) != size:
            raise ValueError(f"header says V={size} but file lists {len(tokens)} tokens")
        return cls(tokens, freqs)

    def save(self, path) -> None:
        Path(path).write_text(self.to_tsv(), encoding="utf-8", newline="\n")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        return cls.from_tsv(Path(path).read_bytes().decode("utf-8"))


def build_vocabulary(corpus: Dataset | Iterable[str], max_size: int) -> Vocabulary:
    """Keep the ``max_size`` most frequent tokens of ``corpus``."""
    if max_size < 1:
        raise ValueError("vocabulary size must be >= 1")
    texts = corpus.texts if isinstance(corpus, Dataset) else list(corpus)
    counts: Counter[str] = Counter()
    for text in texts:
        counts.update(tokenize(text))
    if not counts:
        raise ValueError("empty corpus")
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0].encode("utf-8")))
    ranked = ranked[:max_size]
    return Vocabulary([t for t, _ in ranked], [c for _, c in ranked])


@dataclass(frozen=True)
class EncodedMessage:
    indices: tuple[int, ...]
    original_len: int


def encode(tokens: Sequence[str], vocab: Vocabulary, max_len: int = DEFAULT_MAX_LEN) -> EncodedMessage:
    """Map tokens to indices, keep the first ``max_len`` and left-pad with zeros."""
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    ids = [vocab.index(t) for t in tokens[:max_len]]
    padded = [PAD_INDEX] * (max_len - len(ids)) + ids
    return EncodedMessage(tuple(padded), len(tokens))


def encode_texts(texts: Iterable[str], vocab: Vocabulary, max_len: int = DEFAULT_MAX_LEN) -> np.ndarray:
    """Tokenize and encode many texts into an ``(n, max_len)`` int array."""
    rows = [encode(tokenize(t), vocab, max_len).indices for t in texts]
    if not rows:
        return np.zeros((0, max_len), dtype=np.int64)
    return np.array(rows, dtype=np.int64)


def balanced_sample(data: Dataset, seed: int) -> Dataset:
    """Draw ``min(n0, n1)`` examples from each class and shuffle them together."""
    rng = np.random.default_rng(seed)
    by_label = {0: [], 1: []}
    for ex in data.examples:
        by_label[ex.label].append(ex)
    n = min(len(by_label[0]), len(by_label[1]))
    if n == 0:
        raise ValueError("class missing")
    chosen = []
    for label in (0, 1):
        pool = by_label[label]
        picks = rng.choice(len(pool), size=n, replace=False)
        chosen += [pool[i] for i in sorted(picks)]
    order = rng.permutation(len(chosen))
    return Dataset(tuple(chosen[i] for i in order), f"balanced({data.provenance},seed={seed})")


def split(data: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n = len(data)
    if n < 2:
        raise ValueError("need at least 2 examples to split")
    # Decimal keeps e.g. 0.29 * 100 from flooring to 28.
    n_train = int((Decimal(repr(train_fraction)) * n).to_integral_value(ROUND_FLOOR))
    order = np.random.default_rng(seed).permutation(n)
    shuffled = [data.examples[i] for i in order]
    return (
        Dataset(tuple(shuffled[:n_train]), f"split-train({data.provenance},seed={seed})"),
        Dataset(tuple(shuffled[n_train:]), f"split-test({data.provenance},seed={seed})"),
    )


def _dump_tsv(data: Dataset) -> str:
    out = []
    for ex in data.examples:
        if any(c in ex.text for c in "\t\n\r"):
            raise ValueError(f"text cannot contain tab or newline characters: {ex.text!r}")
        if ex.language is None:
            out.append(f"{ex.label}\t{ex.text}\n")
        else:
            if not ex.language or any(c.isspace() for c in ex.language):
                raise ValueError(f"invalid language tag {ex.language!r}")
            out.append(f"{ex.label}\t{ex.language}\t{ex.text}\n")
    return "".join(out)


def parse_tsv(raw: bytes, source: str = "<bytes>") -> Dataset:
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = raw[: exc.start].count(b"\n") + 1
        raise ValueError(f"{source}: invalid UTF-8 at line {line}") from None
    examples = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.removesuffix("\r")
        if not line:
            continue
        parts = line.split("\t", 2)
        if len(parts) < 2:
            raise ValueError(f"{source}: line {lineno}: expected label<TAB>[lang<TAB>]text")
        if parts[0] not in ("0", "1"):
            raise ValueError(f"{source}: line {lineno}: label must be 0 or 1, got {parts[0]!r}")
        label = int(parts[0])
        if len(parts) == 3:
            examples.append(LabeledExample(label, parts[2], parts[1]))
        else:
            examples.append(LabeledExample(label, parts[1]))
    return Dataset(tuple(examples), source)


def load_tsv(path) -> Dataset:
    return parse_tsv(Path(path).read_bytes(), str(path))


def save_tsv(data: Dataset, path) -> None:
    Path(path).write_bytes(_dump_tsv(data).encode("utf-8"))


def gen_synthetic(task: str, n: int, vocab_size: int, seed: int) -> Dataset:
    """Generate a balanced synthetic corpus.

    ``keyword``: label 1 iff the message holds a token from ``TRIGGER_LEXICON``.
    ``order``: every message holds "alpha" and "beta" once; label 1 iff alpha
    comes first. Both classes share the same bag-of-words distribution.

    Messages are 5-20 tokens drawn uniformly from fillers ``w0 .. w{vocab_size-1}``.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if vocab_size < 10:
        raise ValueError("vocab_size must be >= 10")
    if task not in ("keyword", "order"):
        raise ValueError(f"unknown task {task!r}")
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % 2
    rng.shuffle(labels)
    examples = []
    for label in labels:
        length = int(rng.integers(5, 21))
        words = [f"w{i}" for i in rng.integers(0, vocab_size, size=length)]
        if task == "keyword":
            if label == 1:
                pos = int(rng.integers(0, length))
                words[pos] = TRIGGER_LEXICON[int(rng.integers(0, len(TRIGGER_LEXICON)))]
        else:
            i, j = sorted(int(p) for p in rng.choice(length, size=2, replace=False))
            first, second = ORDER_MARKERS if label == 1 else ORDER_MARKERS[::-1]
            words[i], words[j] = first, second
        examples.append(LabeledExample(int(label), " ".join(words)))
    return Dataset(tuple(examples), f"synthetic(task={task},n={n},vocab_size={vocab_size},seed={seed})")
