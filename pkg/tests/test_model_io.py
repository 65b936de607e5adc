import json

import numpy as np
import pytest

from seqclass import model_io
from seqclass.corpus import Vocabulary, build_vocabulary, gen_synthetic
from seqclass.nn import ModelConfig, init_params
from seqclass.tensor import make_rng
from seqclass.train import Classifier


def make_model(seed=0, V=10, d_e=4, d_h=3):
    vocab = Vocabulary([f"t{i}" for i in range(V)], list(range(V, 0, -1)))
    return Classifier(init_params(ModelConfig(V, d_e, d_h, max_len=8), make_rng(seed)), vocab)


def test_blob_size_by_hand_count(tmp_path):
    # embedding 12*4 = 48, LSTM 4 * (12 + 9 + 3) = 96, dense 3 + 1 = 4 -> 148 float32
    model = make_model()
    model_io.save(model, tmp_path / "m")
    assert model_io.blob_size(model.config) == 592
    assert (tmp_path / "m" / "weights.bin").stat().st_size == 592


def test_save_twice_identical_bytes(tmp_path):
    model = make_model()
    for name in ("a", "b"):
        model_io.save(model, tmp_path / name, optimizer={"kind": "adam"}, seed=1)
    for f in ("manifest.json", "weights.bin", "vocab.tsv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_weight_order_is_documented_layout(tmp_path):
    model = make_model()
    model_io.save(model, tmp_path / "m")
    blob = np.frombuffer((tmp_path / "m" / "weights.bin").read_bytes(), dtype="<f4")
    assert np.array_equal(blob[:48], model.params["embedding"].astype(np.float32).ravel())
    assert np.array_equal(blob[48:60], model.params["W_i"].astype(np.float32).ravel())
    assert np.array_equal(blob[-4:-1], model.params["dense_w"].astype(np.float32).ravel())
    manifest = json.loads((tmp_path / "m" / "manifest.json").read_text())
    assert manifest["tensors"][0] == "embedding:12x4"
    assert manifest["tensors"][-1] == "dense_b:1"


def test_round_trip_predictions_bitwise(tmp_path):
    train = gen_synthetic("keyword", 300, 50, seed=1)
    vocab = build_vocabulary(train, 40)
    model = Classifier(init_params(ModelConfig(vocab.size, 8, 6, max_len=20), make_rng(3)), vocab)
    model_io.save(model, tmp_path / "m")
    loaded = model_io.load(tmp_path / "m")
    assert loaded.vocab == vocab and loaded.config == model.config
    probes = gen_synthetic("keyword", 100, 60, seed=2).texts
    expected = Classifier(model_io.quantized(model.params), vocab).scores(probes)
    assert np.array_equal(loaded.scores(probes), expected)
    assert np.max(np.abs(loaded.scores(probes) - model.scores(probes))) < 1e-5
    # Saving the loaded model reproduces the bundle exactly.
    model_io.save(loaded, tmp_path / "again")
    assert (tmp_path / "m" / "weights.bin").read_bytes() == (tmp_path / "again" / "weights.bin").read_bytes()


def test_hash_mismatch(tmp_path):
    model_io.save(make_model(), tmp_path / "m")
    vocab_file = tmp_path / "m" / "vocab.tsv"
    vocab_file.write_text(vocab_file.read_text().replace("t0\t1\t10", "t0\t1\t11"))
    with pytest.raises(model_io.HashMismatchError):
        model_io.load(tmp_path / "m")


def test_future_version(tmp_path):
    model_io.save(make_model(), tmp_path / "m")
    path = tmp_path / "m" / "manifest.json"
    manifest = json.loads(path.read_text())
    manifest["format_version"] = 2
    path.write_text(json.dumps(manifest))
    with pytest.raises(model_io.FormatVersionError):
        model_io.load(tmp_path / "m")


def test_truncated_blob(tmp_path):
    model_io.save(make_model(), tmp_path / "m")
    path = tmp_path / "m" / "weights.bin"
    path.write_bytes(path.read_bytes()[:-4])
    with pytest.raises(model_io.TruncatedBlobError):
        model_io.load(tmp_path / "m")


def test_error_kinds_are_distinct():
    kinds = {model_io.FormatVersionError, model_io.HashMismatchError, model_io.TruncatedBlobError}
    assert len(kinds) == 3
    assert all(issubclass(k, model_io.BundleError) for k in kinds)


def test_missing_vocab_or_manifest(tmp_path):
    model = make_model()
    with pytest.raises(model_io.BundleError):
        model_io.save(Classifier(model.params, None), tmp_path / "m")
    with pytest.raises(model_io.BundleError):
        model_io.load(tmp_path / "nothing")


def test_no_temp_files_left(tmp_path):
    model_io.save(make_model(), tmp_path / "m")
    assert sorted(p.name for p in (tmp_path / "m").iterdir()) == ["manifest.json", "vocab.tsv", "weights.bin"]
