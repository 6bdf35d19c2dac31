import numpy as np
import pytest
from PIL import Image

from ldf.image import binarize, load_gray, load_mask, save_gray


def _write(path, arr):
    Image.fromarray(arr).save(path)


@pytest.mark.parametrize("value, expected", [(255, 1.0), (0, 0.0), (128, 128 / 255)])
def test_load_8bit_scaling(tmp_path, value, expected):
    path = tmp_path / "m.png"
    _write(path, np.full((3, 4), value, np.uint8))
    out = load_gray(path)
    assert out.shape == (3, 4)
    assert np.all(out == expected)


def test_load_rgb_uses_luma(tmp_path):
    rgb = np.zeros((2, 2, 3), np.uint8)
    rgb[..., 0] = 255
    path = tmp_path / "rgb.png"
    Image.fromarray(rgb).save(path)
    assert np.allclose(load_gray(path), 0.299)


def test_missing_and_non_png(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_gray(tmp_path / "nope.png")
    path = tmp_path / "x.png"
    Image.fromarray(np.zeros((2, 2), np.uint8)).save(path, format="BMP")
    with pytest.raises(ValueError):
        load_gray(path)


def test_save_quantization(tmp_path):
    p16 = tmp_path / "a.png"
    save_gray(np.ones((2, 2)), p16, 16)
    assert np.asarray(Image.open(p16)).max() == 65535
    p8 = tmp_path / "b.png"
    save_gray(np.full((1, 1), 0.5), p8, 8)
    assert np.asarray(Image.open(p8))[0, 0] == 128


def test_round_trip_16bit(tmp_path, rng):
    data = rng.random((17, 23))
    data[0, 0], data[0, 1] = 0.0, 1.0
    path = tmp_path / "r.png"
    save_gray(data, path, 16)
    back = load_gray(path)
    assert np.max(np.abs(back - data)) <= 1 / (2 * 65535) + 1e-15


def test_round_trip_8bit(tmp_path, rng):
    data = rng.random((5, 5))
    path = tmp_path / "r8.png"
    save_gray(data, path, 8)
    assert np.max(np.abs(load_gray(path) - data)) <= 1 / (2 * 255) + 1e-15


def test_binarize_cases():
    assert binarize(np.full((2, 2), 0.6), 0.5).all()
    assert not binarize(np.full((2, 2), 0.4), 0.5).any()
    assert binarize(np.array([[0.2, 0.5, 0.9]]), 0.5).tolist() == [[0, 1, 1]]


@pytest.mark.parametrize("threshold", [1e-6, 0.3, 0.5, 1.0])
def test_binarize_idempotent_on_binary(rng, threshold):
    m = (rng.random((6, 7)) > 0.5).astype(float)
    assert np.array_equal(binarize(m, threshold), m)


def test_binarize_rejects_bad_threshold():
    with pytest.raises(ValueError):
        binarize(np.zeros((2, 2)), 1.5)


def test_load_mask_default_threshold(tmp_path):
    path = tmp_path / "m.png"
    Image.fromarray(np.array([[127, 128, 200]], np.uint8)).save(path)
    assert load_mask(path).tolist() == [[0, 1, 1]]
