import numpy as np
import pytest
from PIL import Image

from jsmreg.io import load_image, normalize_uint8, read_pgm_raw, save_image, to_uint8, write_pgm_raw


def test_pgm_bytes_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    data = rng.integers(0, 256, size=(17, 23), dtype=np.uint8)
    a, b = tmp_path / "a.pgm", tmp_path / "b.pgm"
    write_pgm_raw(a, data)
    assert a.read_bytes().startswith(b"P5\n23 17\n255\n")
    np.testing.assert_array_equal(read_pgm_raw(a), data)
    save_image(b, load_image(a))
    assert a.read_bytes() == b.read_bytes()


def test_pgm_header_with_comment(tmp_path):
    p = tmp_path / "c.pgm"
    p.write_bytes(b"P5\n# made by hand\n2 2\n255\n" + bytes([0, 64, 128, 255]))
    np.testing.assert_array_equal(read_pgm_raw(p), [[0, 64], [128, 255]])
    assert load_image(p)[1, 1] == 1.0


def test_pgm_16_bit(tmp_path):
    data = np.array([[0, 1000], [40000, 65535]], dtype=np.uint16)
    p = tmp_path / "w.pgm"
    write_pgm_raw(p, data)
    np.testing.assert_array_equal(read_pgm_raw(p), data)


def test_truncated_and_foreign_files_rejected(tmp_path):
    p = tmp_path / "t.pgm"
    p.write_bytes(b"P5\n4 4\n255\n" + bytes(3))
    with pytest.raises(ValueError):
        read_pgm_raw(p)
    p.write_bytes(b"P2\n1 1\n255\n0\n")
    with pytest.raises(ValueError):
        read_pgm_raw(p)


def test_png_color_is_channel_average(tmp_path):
    rgb = np.zeros((3, 4, 3), dtype=np.uint8)
    rgb[..., 0] = 255
    p = tmp_path / "c.png"
    Image.fromarray(rgb).save(p)
    np.testing.assert_allclose(load_image(p), 1 / 3)


def test_png_gray_round_trip(tmp_path):
    img = np.linspace(0, 1, 20).reshape(4, 5)
    p = tmp_path / "g.png"
    save_image(p, img)
    np.testing.assert_array_equal(to_uint8(load_image(p)), to_uint8(img))


def test_normalize_uint8_conventions():
    np.testing.assert_array_equal(normalize_uint8(np.full((2, 2), 3.0)), 128)
    out = normalize_uint8(np.array([1.0, np.nan, 3.0, 2.0]))
    np.testing.assert_array_equal(out, [0, 0, 255, 128])
