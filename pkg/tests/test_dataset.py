import math

import numpy as np
import pytest

from fbed.dataset import (
    Dataset,
    DatasetError,
    from_arrays,
    generate_null_dataset,
    load_csv,
    save_csv,
    validate,
)


def write(tmp_path, text, name="d.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_load_small_binary(tmp_path):
    d = load_csv(write(tmp_path, "y,x1\n0,1.5\n1,2.0\n1,0.0\n"), "y")
    assert (d.n, d.p, d.target_kind) == (3, 1, "binary")
    assert d.names == ("x1",)
    assert d.y.tolist() == [0, 1, 1]
    assert d.X[:, 0].tolist() == [1.5, 2.0, 0.0]


def test_target_column_removed_wherever_it_sits(tmp_path):
    d = load_csv(write(tmp_path, "a,t,b\n1,0.5,3\n2,1.5,5\n4,2.5,1\n"), "t")
    assert d.names == ("a", "b")
    assert d.target_kind == "continuous"
    assert d.columns[1].tolist() == [3, 5, 1]


@pytest.mark.parametrize(
    "text, target, message",
    [
        ("y,x\n0,1\n0,2\n0,3\n", "y", "degenerate binary target"),
        ("y,x\n0,1\n1,abc\n", "y", "row 2, column 'x'"),
        ("y,x\n0,1\n1,nan\n", "y", "NaN"),
        ("y,x\n0,1\n1,2\n", "z", "not found"),
        ("y,y,x\n0,1,1\n1,0,2\n", "y", "appears 2 times"),
        ("y,x\n0,1\n1,1\n", "y", "constant column"),
        ("y,x,x\n0,1,2\n1,2,3\n", "y", "unique"),
    ],
)
def test_load_errors(tmp_path, text, target, message):
    with pytest.raises(DatasetError, match=message):
        load_csv(write(tmp_path, text), target)


def test_missing_file(tmp_path):
    with pytest.raises(DatasetError, match="no such file"):
        load_csv(tmp_path / "nope.csv", "y")


def test_round_trip_is_bit_exact(tmp_path):
    d = generate_null_dataset(200, 7, seed=11)
    path = tmp_path / "null.csv"
    save_csv(d, path)
    back = load_csv(path, "y")
    assert back.names == d.names
    assert back.target_kind == "binary"
    assert np.array_equal(back.X, d.X)
    assert np.array_equal(back.y, d.y)


def test_null_dataset_shape():
    d = generate_null_dataset(200, 100, seed=1)
    assert (d.n, d.p, d.target_kind) == (200, 100, "binary")
    validate(d)


def test_null_dataset_is_deterministic():
    a = generate_null_dataset(50, 4, seed=9)
    b = generate_null_dataset(50, 4, seed=9)
    c = generate_null_dataset(50, 4, seed=10)
    assert np.array_equal(a.X, b.X) and np.array_equal(a.y, b.y)
    assert not np.array_equal(a.X, c.X)


def test_null_dataset_tiny_n_always_has_both_classes():
    for seed in range(200):
        d = generate_null_dataset(2, 1, seed)
        assert sorted(d.y.tolist()) == [0.0, 1.0]


def test_null_column_means_clt():
    n, reps = 200, 100
    means = np.array([generate_null_dataset(n, 3, seed).X.mean(axis=0) for seed in range(reps)])
    bound = 3 / math.sqrt(reps * n)
    assert np.all(np.abs(means.mean(axis=0)) < bound)


def test_dataset_is_read_only():
    d = from_arrays([[1.0], [2.0], [3.0]], [0, 1, 0])
    with pytest.raises(ValueError):
        d.X[0, 0] = 5.0


def test_direct_construction_validates():
    with pytest.raises(DatasetError, match="only contain 0 and 1"):
        Dataset(X=np.array([[1.0], [2.0]]), y=np.array([0.0, 2.0]), names=("a",),
                target_kind="binary")
    with pytest.raises(DatasetError, match="entries"):
        Dataset(X=np.array([[1.0], [2.0]]), y=np.array([0.0]), names=("a",))
