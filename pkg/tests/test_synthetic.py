import numpy as np
import pytest
from mdgcn_hsi.errors import ParameterError
from mdgcn_hsi.synthetic import make_synthetic_scene


def test_shapes_and_dtypes():
    cube, labels = make_synthetic_scene(height=20, width=12, bands=5, n_classes=3, block=4)
    assert cube.shape == (20, 12, 5)
    assert cube.values.dtype == np.float32
    assert labels.labels.shape == (20, 12)


def test_every_class_present_and_every_pixel_labeled():
    _, labels = make_synthetic_scene(n_classes=4, block=16)
    assert set(np.unique(labels.labels).tolist()) == {1, 2, 3, 4}


def test_blocks_are_uniform():
    _, labels = make_synthetic_scene(height=32, width=32, block=8)
    for r in range(0, 32, 8):
        for c in range(0, 32, 8):
            assert len(np.unique(labels.labels[r : r + 8, c : c + 8])) == 1


def test_ragged_edge_blocks():
    _, labels = make_synthetic_scene(height=10, width=10, n_classes=2, block=4)
    assert labels.labels.shape == (10, 10)


def test_deterministic_per_seed():
    a = make_synthetic_scene(seed=3)
    b = make_synthetic_scene(seed=3)
    c = make_synthetic_scene(seed=4)
    np.testing.assert_array_equal(a[0].values, b[0].values)
    np.testing.assert_array_equal(a[1].labels, b[1].labels)
    assert not np.array_equal(a[0].values, c[0].values)


def test_noise_free_pixels_share_their_class_mean():
    cube, labels = make_synthetic_scene(height=16, width=16, bands=3, n_classes=2, block=8, noise=0)
    for cls in (1, 2):
        spectra = cube.values[labels.labels == cls]
        assert (spectra == spectra[0]).all()


@pytest.mark.parametrize(
    "kwargs", [{"block": 0}, {"noise": -1.0}, {"height": 8, "width": 8, "block": 8, "n_classes": 2}]
)
def test_rejects(kwargs):
    with pytest.raises(ParameterError):
        make_synthetic_scene(**kwargs)
