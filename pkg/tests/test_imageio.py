import numpy as np
import pytest
from PIL import Image

from planesym.imageio import (
    ImageReadError, circle_mask, load_image, save_png16, select_region, tile_image,
)
from planesym.validation import check_image, check_images, is_power_of_two, wrap_degrees


def test_png16_round_trip(tmp_path):
    img = np.linspace(0, 1, 64 * 32).reshape(32, 64)
    path = tmp_path / "a.png"
    save_png16(path, img)
    back = load_image(path)
    assert back.shape == (32, 64)
    assert np.abs(back - img).max() <= 0.5 / 65535 + 1e-12


def test_rgb_is_collapsed_to_luminance(tmp_path):
    rgb = np.zeros((4, 4, 3), np.uint8)
    rgb[..., 1] = 255
    path = tmp_path / "g.png"
    Image.fromarray(rgb).save(path)
    assert np.allclose(load_image(path), 0.7152)


def test_8bit_and_tiff(tmp_path):
    arr = np.arange(256, dtype=np.uint8).reshape(16, 16)
    Image.fromarray(arr).save(tmp_path / "g.tif")
    assert np.allclose(load_image(tmp_path / "g.tif"), arr / 255.0)


def test_unreadable_file(tmp_path):
    bad = tmp_path / "bad.png"
    bad.write_bytes(b"not an image")
    with pytest.raises(ImageReadError):
        load_image(bad)
    with pytest.raises(ImageReadError):
        load_image(tmp_path / "missing.png")


def test_tile_image():
    img = np.arange(6.0).reshape(2, 3)
    t = tile_image(img, 2, 3)
    assert t.shape == (6, 6)
    assert np.array_equal(t[2:4, 3:6], img)
    with pytest.raises(ValueError):
        tile_image(img, 0, 1)


def test_select_square_and_circle():
    img = np.random.default_rng(0).random((40, 50))
    sq = select_region(img, "square", 16)
    assert np.array_equal(sq, img[12:28, 17:33])
    sq = select_region(img, "square", 16, center=(10, 10))
    assert np.array_equal(sq, img[2:18, 2:18])
    circ = select_region(img, "circle", 16)
    inside = circle_mask(16)
    assert np.array_equal(circ[inside], img[12:28, 17:33][inside])
    assert np.allclose(circ[~inside], img[12:28, 17:33][inside].mean())


def test_select_errors():
    img = np.zeros((40, 40))
    with pytest.raises(ValueError):
        select_region(img, "square", 24)
    with pytest.raises(ValueError):
        select_region(img, "square", 64)
    with pytest.raises(ValueError):
        select_region(img, "hexagon", 16)
    with pytest.raises(ValueError):
        select_region(img, "square", 16, center=(2, 2))


def test_circle_mask_area():
    m = circle_mask(256)
    assert m.sum() == pytest.approx(np.pi * 128 ** 2, rel=0.01)
    assert m[128, 128] and not m[0, 0]


def test_validation_helpers():
    assert is_power_of_two(1024) and not is_power_of_two(1000) and not is_power_of_two("x")
    with pytest.raises(ValueError):
        check_image(np.zeros(5))
    with pytest.raises(ValueError):
        check_image(np.array([[np.nan]]))
    with pytest.raises(ValueError):
        check_image(np.zeros((0, 3)))
    assert len(check_images(np.zeros((3, 4, 4)))) == 3
    assert len(check_images(np.zeros((4, 4)))) == 1
    with pytest.raises(ValueError):
        check_images(np.zeros((1, 2, 3, 4)))
    assert wrap_degrees(180.0) == -180.0
    assert wrap_degrees(-190.0) == pytest.approx(170.0)
