"""Model bundles: a directory holding ``manifest.json``, ``weights.bin`` and
``vocab.tsv``.

``weights.bin`` is the raw concatenation of every parameter tensor in
``PARAM_ORDER`` (embedding; W, U, b for gates i, f, c, o; dense w, b), each
C-ordered, as little-endian float32. Loading promotes to float64.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .corpus import Vocabulary
from .nn import PARAM_ORDER, ModelConfig, ModelParams
from .train import Classifier

FORMAT_NAME = "seqclass-bundle"
FORMAT_VERSION = 1
MANIFEST = "manifest.json"
WEIGHTS = "weights.bin"
VOCAB = "vocab.tsv"
_DISK_DTYPE = np.dtype("<f4")


class BundleError(ValueError):
    pass


class FormatVersionError(BundleError):
    pass


class HashMismatchError(BundleError):
    pass


class TruncatedBlobError(BundleError):
    pass


def _atomic_write(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def weights_blob(params: ModelParams) -> bytes:
    return b"".join(params[name].astype(_DISK_DTYPE).tobytes(order="C") for name in PARAM_ORDER)


def blob_size(config: ModelConfig) -> int:
    return config.n_params() * _DISK_DTYPE.itemsize


def quantized(params: ModelParams) -> ModelParams:
    """Params rounded to the on-disk float32 precision (and back to float64)."""
    return ModelParams(params.config, {k: v.astype(np.float32).astype(np.float64) for k, v in params.tensors.items()})


def save(model: Classifier, path, optimizer: dict | None = None, seed: int | None = None) -> Path:
    if model.vocab is None:
        raise BundleError("cannot save a model without its vocabulary")
    cfg = model.config
    if cfg.vocab_size != model.vocab.size:
        raise BundleError(f"model expects V={cfg.vocab_size} but vocabulary has {model.vocab.size} tokens")
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    vocab_bytes = model.vocab.to_tsv().encode("utf-8")
    blob = weights_blob(model.params)
    manifest = {
        "format": FORMAT_NAME,
        "format_version": FORMAT_VERSION,
        "config": {
            "vocab_size": cfg.vocab_size,
            "embed_units": cfg.embed_units,
            "lstm_units": cfg.lstm_units,
            "max_len": cfg.max_len,
            "dropout": cfg.dropout,
            "activation": cfg.activation,
        },
        "tensors": [f"{name}:{'x'.join(map(str, model.params[name].shape))}" for name in PARAM_ORDER],
        "weights_file": WEIGHTS,
        "weights_dtype": "float32-le",
        "weights_bytes": len(blob),
        "vocab_file": VOCAB,
        "vocab_sha256": hashlib.sha256(vocab_bytes).hexdigest(),
        "optimizer": optimizer,
        "seed": seed,
    }
    _atomic_write(out / VOCAB, vocab_bytes)
    _atomic_write(out / WEIGHTS, blob)
    _atomic_write(out / MANIFEST, (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode("utf-8"))
    return out


def load(path) -> Classifier:
    root = Path(path)
    try:
        manifest = json.loads((root / MANIFEST).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise BundleError(f"{root}: no {MANIFEST}") from None
    except json.JSONDecodeError as exc:
        raise BundleError(f"{root / MANIFEST}: {exc}") from None
    if manifest.get("format") != FORMAT_NAME:
        raise BundleError(f"{root}: not a {FORMAT_NAME}")
    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise FormatVersionError(f"{root}: format version {version} unsupported (expected {FORMAT_VERSION})")

    vocab_bytes = (root / manifest["vocab_file"]).read_bytes()
    if hashlib.sha256(vocab_bytes).hexdigest() != manifest["vocab_sha256"]:
        raise HashMismatchError(f"{root}: vocabulary hash does not match manifest")
    vocab = Vocabulary.from_tsv(vocab_bytes.decode("utf-8"))

    config = ModelConfig(**manifest["config"])
    blob = (root / manifest["weights_file"]).read_bytes()
    expected = blob_size(config)
    if len(blob) != expected or manifest.get("weights_bytes") != expected:
        raise TruncatedBlobError(f"{root}: weights blob has {len(blob)} bytes, expected {expected}")

    tensors = {}
    offset = 0
    shapes = config.param_shapes()
    for name in PARAM_ORDER:
        shape = shapes[name]
        count = int(np.prod(shape))
        arr = np.frombuffer(blob, dtype=_DISK_DTYPE, count=count, offset=offset)
        tensors[name] = arr.astype(np.float64).reshape(shape)
        offset += count * _DISK_DTYPE.itemsize
    return Classifier(ModelParams(config, tensors), vocab)
