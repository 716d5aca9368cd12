import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from hybrid_stereo.core import (
    INVALID,
    DisparityMap,
    DisparityOverflowError,
    MalformedImageError,
    UnsupportedDepthError,
    encode_kitti,
    load_gray_image,
    load_kitti_disparity,
    rotate180,
    save_gray_image,
    save_kitti_disparity,
)


def test_rotate_single_pixel():
    assert rotate180(np.array([[7]], dtype=np.uint8)).tolist() == [[7]]


def test_rotate_2x2():
    img = np.array([[1, 2], [3, 4]], dtype=np.uint8)
    assert rotate180(img).tolist() == [[4, 3], [2, 1]]


def test_rotate_is_involution(rng):
    img = rng.integers(0, 256, (17, 33), dtype=np.uint8)
    assert np.array_equal(rotate180(rotate180(img)), img)


def test_rotate_disparity_keeps_invalid():
    d = DisparityMap(np.array([[INVALID, 3.0, 0.0]]), 10)
    r = rotate180(d)
    assert isinstance(r, DisparityMap)
    assert r.values.tolist() == [[0.0, 3.0, INVALID]]
    assert rotate180(r) == d


@given(arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12))))
def test_rotate_index_identity(img):
    out = rotate180(img)
    h, w = img.shape
    for y in range(h):
        for x in range(w):
            assert out[y, x] == img[h - 1 - y, w - 1 - x]


def test_disparity_map_rejects_out_of_range():
    with pytest.raises(ValueError):
        DisparityMap(np.array([[5.0, 11.0]]), 10)
    with pytest.raises(ValueError):
        DisparityMap(np.array([[-0.5]]), 10)


def test_disparity_map_is_immutable():
    d = DisparityMap(np.zeros((2, 2)), 4)
    with pytest.raises(ValueError):
        d.values[0, 0] = 1


def test_pgm_p5_roundtrip_header(tmp_path):
    p = tmp_path / "a.pgm"
    p.write_bytes(b"P5 2 1 255\n" + bytes([0, 255]))
    img = load_gray_image(p)
    assert img.shape == (1, 2)
    assert img.tolist() == [[0, 255]]


def test_pgm_with_comment(tmp_path):
    p = tmp_path / "c.pgm"
    p.write_bytes(b"P5\n# made by hand\n3 1\n255\n" + bytes([1, 2, 3]))
    assert load_gray_image(p).tolist() == [[1, 2, 3]]


def test_pgm_truncated_payload(tmp_path):
    p = tmp_path / "t.pgm"
    p.write_bytes(b"P5 4 4 255\n" + bytes(10))
    with pytest.raises(MalformedImageError):
        load_gray_image(p)


def test_pgm_sixteen_bit(tmp_path):
    p = tmp_path / "s.pgm"
    p.write_bytes(b"P5 2 1 65535\n" + bytes(4))
    with pytest.raises(UnsupportedDepthError):
        load_gray_image(p)


def test_pgm_bad_header(tmp_path):
    p = tmp_path / "b.pgm"
    p.write_bytes(b"P5 x 1 255\n\x00")
    with pytest.raises(MalformedImageError):
        load_gray_image(p)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_gray_image(tmp_path / "nope.png")
    with pytest.raises(FileNotFoundError):
        load_kitti_disparity(tmp_path / "nope.png")


def test_garbage_png(tmp_path):
    p = tmp_path / "g.png"
    p.write_bytes(b"\x89PNG not really")
    with pytest.raises(MalformedImageError):
        load_gray_image(p)


def test_png_gray_and_color(tmp_path, rng):
    img = rng.integers(0, 256, (5, 7), dtype=np.uint8)
    save_gray_image(img, tmp_path / "g.png")
    assert np.array_equal(load_gray_image(tmp_path / "g.png"), img)

    rgb = np.zeros((2, 2, 3), dtype=np.uint8)
    rgb[..., 0] = 255
    Image.fromarray(rgb, "RGB").save(tmp_path / "c.png")
    # ITU-R 601-2 luma: 299/1000 * 255
    assert load_gray_image(tmp_path / "c.png").tolist() == [[76, 76], [76, 76]]


def test_png_sixteen_bit_gray_image_rejected(tmp_path):
    Image.fromarray(np.zeros((2, 2), dtype=np.uint16)).save(tmp_path / "d.png")
    with pytest.raises(UnsupportedDepthError):
        load_gray_image(tmp_path / "d.png")


def _write_u16(path, arr):
    Image.fromarray(np.asarray(arr, dtype=np.uint16)).save(path)


def test_kitti_decode(tmp_path):
    _write_u16(tmp_path / "k.png", [[12800, 0, 1]])
    d = load_kitti_disparity(tmp_path / "k.png")
    assert d.values[0, 0] == 50.0
    assert d.values[0, 1] == INVALID
    assert d.values[0, 2] == 1 / 256


def test_kitti_rejects_8bit(tmp_path):
    save_gray_image(np.zeros((2, 2), dtype=np.uint8), tmp_path / "e.png")
    with pytest.raises(UnsupportedDepthError):
        load_kitti_disparity(tmp_path / "e.png")


def test_kitti_encode_values():
    d = DisparityMap(np.array([[50.0, INVALID]]), 255)
    assert encode_kitti(d).tolist() == [[12800, 0]]


def test_kitti_overflow(tmp_path):
    d = DisparityMap(np.array([[300.0]]), 400)
    with pytest.raises(DisparityOverflowError):
        save_kitti_disparity(d, tmp_path / "o.png")


def test_kitti_valid_zero_stays_valid(tmp_path):
    d = DisparityMap(np.array([[0.0, 4.0]]), 10)
    save_kitti_disparity(d, tmp_path / "z.png")
    back = load_kitti_disparity(tmp_path / "z.png")
    assert back.valid.all()
    assert abs(back.values[0, 0]) <= 1 / 256


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (6, 5), elements=st.floats(0, 255, allow_nan=False)),
       arrays(np.bool_, (6, 5)))
def test_kitti_roundtrip_within_quantum(tmp_path_factory, vals, invalid):
    path = tmp_path_factory.mktemp("rt") / "d.png"
    vals = np.where(invalid, INVALID, vals)
    d = DisparityMap(vals, 255)
    save_kitti_disparity(d, path)
    back = load_kitti_disparity(path)
    assert np.array_equal(back.valid, d.valid)
    assert np.all(np.abs(back.values - d.values)[d.valid] <= 1 / 256)
