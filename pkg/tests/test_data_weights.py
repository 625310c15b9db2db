import json

import numpy as np
import pytest

from pathprox.data import (
    ColumnScale,
    Dataset,
    blob_datasets,
    load_csv,
    make_blobs,
    read_raw_csv,
    sidecar_path,
    split_dataset,
    write_csv,
)
from pathprox.numerics import InputValidationError, make_rng
from pathprox.pathnorm import ShallowParams
from pathprox.weights import MAGIC, WeightFileError, load_weights, save_weights


def test_hand_file(tmp_path):
    f = tmp_path / "toy.csv"
    f.write_text("1,0.0,5.0\n0,2.0,5.0\n")
    ds = load_csv(f)
    assert ds.labels.tolist() == [1, 0]
    assert ds.features.tolist() == [[0.0, 0.0], [1.0, 0.0]]
    assert ds.split == "train"


def test_bad_files(tmp_path):
    f = tmp_path / "empty.csv"
    f.write_text("")
    with pytest.raises(InputValidationError, match="no data rows"):
        load_csv(f)
    cases = {
        "1,0.5\n0,abc\n": ":2:",
        "1,0.5\n0,0.1,0.2\n": ":2:",
        "1,0.5\n1.5,0.2\n": ":2:",
        "1,0.5\n0,0.1\n-1,0.3\n": ":3:",
        "1,nan\n": ":1:",
        "1\n": ":1:",
    }
    for text, where in cases.items():
        f.write_text(text)
        with pytest.raises(InputValidationError, match=where):
            read_raw_csv(f)


def test_round_trip(tmp_path):
    rng = make_rng(0)
    raw = rng.normal(scale=3, size=(30, 4))
    labels = rng.integers(0, 3, size=30)
    f = tmp_path / "d.csv"
    scale = write_csv(f, labels, raw)
    ds = load_csv(f)
    assert np.array_equal(ds.labels, labels)
    assert np.max(np.abs(scale.invert(ds.features) - raw)) <= 1e-12
    assert ds.features.min() == 0.0 and ds.features.max() == 1.0
    assert json.loads(sidecar_path(f).read_text())["min"] == raw.min(axis=0).tolist()


def test_test_file_uses_training_scale(tmp_path):
    tr, te = tmp_path / "tr.csv", tmp_path / "te.csv"
    tr.write_text("0,0.0\n1,10.0\n")
    te.write_text("0,5.0\n1,20.0\n")
    train = load_csv(tr)
    test = load_csv(te, scale=train.scale, split="test")
    assert test.features[:, 0].tolist() == [0.5, 1.0]


def test_constant_column_and_scale_json():
    s = ColumnScale.fit([[1.0, 3.0], [1.0, 5.0]])
    assert s.apply([[1.0, 4.0]]).tolist() == [[0.0, 0.5]]
    s2 = ColumnScale.from_json(s.to_json())
    assert np.array_equal(s2.lo, s.lo) and np.array_equal(s2.hi, s.hi)


def test_dataset_validation():
    with pytest.raises(InputValidationError):
        Dataset(np.ones((2, 2)), np.ones(3, dtype=int))
    with pytest.raises(InputValidationError):
        Dataset(np.array([[np.nan]]), np.zeros(1, dtype=int))
    with pytest.raises(InputValidationError):
        Dataset(np.ones((1, 1)), np.array([-1]))


def test_blobs():
    labels, raw = make_blobs(100, 3, seed=1)
    assert raw.shape == (100, 3) and labels.sum() == 50
    l2, r2 = make_blobs(100, 3, seed=1)
    assert np.array_equal(raw, r2)
    train, test = blob_datasets(seed=0)
    assert len(train) == 1600 and len(test) == 400
    assert train.features.min() >= 0 and train.features.max() <= 1
    a, b = split_dataset(train, 0.25, seed=0)
    assert len(a) == 1200 and len(b) == 400 and b.split == "test"


def test_weights_round_trip(tmp_path):
    rng = make_rng(2)
    params = ShallowParams(rng.normal(size=(4, 3)), rng.normal(size=(4, 5)))
    f = tmp_path / "w.bin"
    save_weights(f, params)
    blob = f.read_bytes()
    assert blob[:5] == MAGIC and len(blob) == 5 + 24 + 8 * (12 + 20)
    back = load_weights(f)
    assert np.array_equal(back.V, params.V) and np.array_equal(back.W, params.W)


def test_weights_errors(tmp_path):
    f = tmp_path / "w.bin"
    save_weights(f, ShallowParams(np.ones((2, 1)), np.ones((2, 2))))
    blob = f.read_bytes()
    f.write_bytes(b"XXXX1" + blob[5:])
    with pytest.raises(WeightFileError, match="magic"):
        load_weights(f)
    f.write_bytes(blob[:-3])
    with pytest.raises(WeightFileError, match="bytes"):
        load_weights(f)
    f.write_bytes(blob[:10])
    with pytest.raises(WeightFileError, match="truncated"):
        load_weights(f)
