"""Tests for the cube / label codecs, standardization and label sampling."""

import numpy as np
import pytest
from mdgcn_hsi import datacube_io as io
from mdgcn_hsi.errors import (
    DataError,
    FormatError,
    LengthError,
    ParameterError,
    SamplingError,
    ShapeError,
)


def _write_cube_bytes(path, dims, values, magic=b"HSIC"):
    header = np.array(dims, dtype="<u4").tobytes()
    path.write_bytes(magic + header + np.asarray(values, dtype="<f4").tobytes())


def _write_label_bytes(path, dims, values):
    header = np.array(dims, dtype="<u4").tobytes()
    path.write_bytes(b"HSIL" + header + np.asarray(values, dtype="<u2").tobytes())


# ── load_cube ─────────────────────────────────────────────────────────


def test_load_cube_echoes_header_dimensions(tmp_path):
    path = tmp_path / "c.hsic"
    _write_cube_bytes(path, (2, 3, 4), np.arange(24))
    cube = io.load_cube(path)
    assert cube.shape == (2, 3, 4)
    assert (cube.height, cube.width, cube.bands) == (2, 3, 4)


def test_load_cube_is_band_sequential(tmp_path):
    # Band 0 row-major first, then band 1, ...
    path = tmp_path / "c.hsic"
    _write_cube_bytes(path, (2, 3, 4), np.arange(24))
    cube = io.load_cube(path)
    for r in range(2):
        for c in range(3):
            for b in range(4):
                assert cube.values[r, c, b] == b * 6 + r * 3 + c


def test_load_cube_bad_magic(tmp_path):
    path = tmp_path / "c.hsic"
    _write_cube_bytes(path, (2, 3, 4), np.arange(24), magic=b"XXXX")
    with pytest.raises(FormatError):
        io.load_cube(path)


def test_load_cube_truncated_payload(tmp_path):
    path = tmp_path / "c.hsic"
    _write_cube_bytes(path, (2, 3, 4), np.arange(23))
    with pytest.raises(LengthError):
        io.load_cube(path)


def test_load_cube_truncated_header(tmp_path):
    path = tmp_path / "c.hsic"
    path.write_bytes(b"HSIC\x02\x00")
    with pytest.raises(LengthError):
        io.load_cube(path)


def test_load_cube_rejects_non_finite(tmp_path):
    values = np.arange(24, dtype=np.float32)
    values[5] = np.nan
    path = tmp_path / "c.hsic"
    _write_cube_bytes(path, (2, 3, 4), values)
    with pytest.raises(DataError):
        io.load_cube(path)


def test_cube_round_trip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(3)
    cube = io.DataCube(rng.standard_normal((5, 7, 3)).astype(np.float32))
    path = tmp_path / "c.hsic"
    io.save_cube(cube, path)
    again = io.load_cube(path)
    assert again.values.dtype == np.float32
    assert again.values.tobytes() == cube.values.tobytes()


def test_datacube_validates_shape_and_values():
    with pytest.raises(ShapeError):
        io.DataCube(np.zeros((2, 2)))
    with pytest.raises(ShapeError):
        io.DataCube(np.zeros((0, 2, 3)))
    with pytest.raises(DataError):
        io.DataCube(np.full((1, 1, 1), np.inf))


# ── load_labels ───────────────────────────────────────────────────────


def test_load_labels_infers_class_count(tmp_path):
    path = tmp_path / "l.hsil"
    _write_label_bytes(path, (2, 2), [0, 1, 1, 2])
    labels = io.load_labels(path)
    assert labels.n_classes == 2
    assert labels.labels.tolist() == [[0, 1], [1, 2]]


def test_load_labels_dimension_mismatch(tmp_path):
    path = tmp_path / "l.hsil"
    _write_label_bytes(path, (2, 2), [0, 1, 1, 2])
    cube = io.DataCube(np.zeros((3, 2, 1), dtype=np.float32))
    with pytest.raises(ShapeError):
        io.load_labels(path, cube)


def test_load_labels_all_zero_is_valid(tmp_path):
    path = tmp_path / "l.hsil"
    _write_label_bytes(path, (2, 2), [0, 0, 0, 0])
    assert io.load_labels(path).n_classes == 0


def test_load_labels_warns_on_gaps(tmp_path, caplog):
    path = tmp_path / "l.hsil"
    _write_label_bytes(path, (1, 3), [1, 3, 3])
    with caplog.at_level("WARNING"):
        labels = io.load_labels(path)
    assert labels.n_classes == 3
    assert "not contiguous" in caplog.text


def test_labels_round_trip_is_bit_exact(tmp_path):
    labels = io.LabelMap(np.array([[0, 4, 2], [1, 1, 3]]))
    path = tmp_path / "l.hsil"
    io.save_labels(labels, path)
    assert io.load_labels(path).labels.tolist() == labels.labels.tolist()


# ── standardize ───────────────────────────────────────────────────────


def test_standardize_two_values():
    cube = io.DataCube(np.array([[[1.0], [3.0]]]))
    out = io.standardize(cube)
    assert out.values.ravel().tolist() == [-1.0, 1.0]


def test_standardize_constant_band_is_zero():
    cube = io.DataCube(np.full((1, 3, 1), 5.0))
    assert io.standardize(cube).values.ravel().tolist() == [0.0, 0.0, 0.0]


def test_standardize_moments_and_idempotence():
    rng = np.random.default_rng(0)
    cube = io.DataCube(rng.uniform(-4, 9, size=(6, 5, 4)))
    once = io.standardize(cube)
    np.testing.assert_allclose(once.values.mean(axis=(0, 1)), 0.0, atol=1e-12)
    np.testing.assert_allclose(once.values.std(axis=(0, 1)), 1.0, atol=1e-12)
    twice = io.standardize(once)
    assert twice.shape == cube.shape
    np.testing.assert_allclose(twice.values, once.values, atol=1e-12)


# ── sample_training_pixels ────────────────────────────────────────────


def test_sample_full_class_splits_27_3():
    labels = io.LabelMap(np.ones((20, 50), dtype=np.int64))
    split = io.sample_training_pixels(labels, per_class=30, val_fraction=0.1, seed=1)
    assert len(split.train_pixels) == 27
    assert len(split.validation_pixels) == 3


def test_sample_short_class_draws_half():
    grid = np.zeros((10, 10), dtype=np.int64)
    grid[:5] = 1  # 50 pixels of class 1
    grid[5, :2] = 2
    grid[6] = 2
    grid[7, :8] = 2  # 20 pixels of class 2
    split = io.sample_training_pixels(io.LabelMap(grid), per_class=30, seed=0)
    class2 = [p for p in split.all_pixels() if p[2] == 2]
    class1 = [p for p in split.all_pixels() if p[2] == 1]
    assert len(class2) == 15
    assert len(class1) == 30


def test_sample_is_deterministic_and_disjoint():
    rng = np.random.default_rng(5)
    labels = io.LabelMap(rng.integers(0, 4, size=(30, 30)))
    a = io.sample_training_pixels(labels, per_class=10, seed=7)
    b = io.sample_training_pixels(labels, per_class=10, seed=7)
    assert a.train_pixels == b.train_pixels
    assert a.validation_pixels == b.validation_pixels
    train = {(r, c) for r, c, _ in a.train_pixels}
    val = {(r, c) for r, c, _ in a.validation_pixels}
    assert not train & val
    for r, c, k in a.all_pixels():
        assert labels.labels[r, c] == k


def test_sample_keeps_one_pixel_on_each_side():
    labels = io.LabelMap(np.array([[1, 1, 2, 2]]))
    split = io.sample_training_pixels(labels, per_class=2, val_fraction=0.9)
    assert len(split.train_pixels) == 2
    assert len(split.validation_pixels) == 2


def test_sample_rejects_tiny_class():
    labels = io.LabelMap(np.array([[1, 1, 2]]))
    with pytest.raises(SamplingError):
        io.sample_training_pixels(labels, per_class=2)


def test_sample_rejects_unlabeled_map():
    with pytest.raises(SamplingError):
        io.sample_training_pixels(io.LabelMap(np.zeros((2, 2), dtype=np.int64)))


@pytest.mark.parametrize("per_class,val_fraction", [(1, 0.1), (30, 0.0), (30, 1.0)])
def test_sample_parameter_checks(per_class, val_fraction):
    labels = io.LabelMap(np.ones((4, 4), dtype=np.int64))
    with pytest.raises(ParameterError):
        io.sample_training_pixels(labels, per_class=per_class, val_fraction=val_fraction)


# ── split files ───────────────────────────────────────────────────────


def test_split_round_trip(tmp_path):
    labels = io.LabelMap(np.array([[1, 1, 2], [2, 1, 2]]))
    split = io.SplitSpec([(0, 0, 1), (1, 0, 2)], [(0, 1, 1)], seed=3)
    path = tmp_path / "split.csv"
    io.write_split(split, path)
    assert path.read_text().splitlines() == ["0,0,1,train", "1,0,2,train", "0,1,1,val"]
    again = io.read_split(path, labels, seed=3)
    assert again == split


def test_read_split_rejects_bad_role(tmp_path):
    path = tmp_path / "split.csv"
    path.write_text("0,0,1,test\n")
    with pytest.raises(FormatError):
        io.read_split(path)


def test_read_split_rejects_overlap(tmp_path):
    path = tmp_path / "split.csv"
    path.write_text("0,0,1,train\n0,0,1,val\n")
    with pytest.raises(FormatError):
        io.read_split(path)


def test_read_split_checks_labels(tmp_path):
    labels = io.LabelMap(np.array([[1, 2]]))
    path = tmp_path / "split.csv"
    path.write_text("0,1,1,train\n")
    with pytest.raises(FormatError):
        io.read_split(path, labels)
    path.write_text("3,0,1,train\n")
    with pytest.raises(ShapeError):
        io.read_split(path, labels)
