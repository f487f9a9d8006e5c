import struct

import numpy as np
import pytest
from PIL import Image

from derain.tensor import ColorVideo
from derain.videoio import (
    BadMagicError,
    FrameError,
    TensorFileError,
    TruncatedFileError,
    read_frames,
    read_raw,
    rgb_to_yuv,
    write_frames,
    write_raw,
    yuv_to_rgb,
)


def test_raw_round_trip_and_header(tmp_path, rng):
    x = rng.uniform(size=(3, 4, 5))
    path = tmp_path / "v.fdr"
    write_raw(path, x)
    data = path.read_bytes()
    assert data[:4] == b"FDR1"
    assert struct.unpack("<III", data[4:16]) == (4, 5, 3)  # m, n, t
    assert len(data) == 16 + 4 * x.size
    np.testing.assert_array_equal(read_raw(path), x.astype(np.float32))


def test_raw_payload_order_is_frame_major(tmp_path):
    x = np.arange(24, dtype=float).reshape(2, 3, 4)
    path = tmp_path / "v.fdr"
    write_raw(path, x)
    payload = np.frombuffer(path.read_bytes()[16:], dtype="<f4")
    m, n = 3, 4
    assert payload[(1 * m + 2) * n + 3] == x[1, 2, 3]


def test_truncated_payload(tmp_path):
    path = tmp_path / "v.fdr"
    write_raw(path, np.ones((2, 3, 3)))
    path.write_bytes(path.read_bytes()[:-4])
    with pytest.raises(TruncatedFileError, match="payload"):
        read_raw(path)
    path.write_bytes(b"FDR1\x00")
    with pytest.raises(TruncatedFileError, match="header"):
        read_raw(path)


def test_bad_magic(tmp_path):
    path = tmp_path / "v.fdr"
    path.write_bytes(b"NOPE" + struct.pack("<III", 1, 1, 1) + b"\x00" * 4)
    with pytest.raises(BadMagicError):
        read_raw(path)


def test_non_finite_payload_rejected(tmp_path):
    path = tmp_path / "v.fdr"
    path.write_bytes(b"FDR1" + struct.pack("<III", 1, 1, 1) + np.float32(np.nan).tobytes())
    with pytest.raises(TensorFileError):
        read_raw(path)


def test_gray_frames_round_trip(tmp_path, rng):
    x = np.round(rng.uniform(size=(3, 6, 7)) * 255) / 255
    paths = write_frames(tmp_path / "f", x)
    assert [p.name for p in paths] == ["0000.png", "0001.png", "0002.png"]
    np.testing.assert_allclose(read_frames(tmp_path / "f"), x, atol=1e-12)


def test_color_frames_round_trip(tmp_path, rng):
    arr = np.round(rng.uniform(size=(2, 5, 5, 3)) * 255) / 255
    write_frames(tmp_path / "c", ColorVideo.from_array(arr))
    back = read_frames(tmp_path / "c")
    assert isinstance(back, ColorVideo)
    np.testing.assert_allclose(back.to_array(), arr, atol=1e-12)


def test_frames_sorted_numerically(tmp_path):
    d = tmp_path / "f"
    d.mkdir()
    for k in (10, 2, 1):
        Image.fromarray(np.full((4, 4), k, dtype=np.uint8)).save(d / f"{k}.png")
    (d / "notes.txt").write_text("ignored")
    frames = read_frames(d)
    assert list(frames[:, 0, 0] * 255) == [1, 2, 10]


def test_mismatched_frame_names_offender(tmp_path):
    d = tmp_path / "f"
    d.mkdir()
    Image.fromarray(np.zeros((4, 4), dtype=np.uint8)).save(d / "0.png")
    Image.fromarray(np.zeros((4, 5), dtype=np.uint8)).save(d / "1.png")
    with pytest.raises(FrameError, match="1.png"):
        read_frames(d)


def test_empty_or_missing_directory(tmp_path):
    with pytest.raises(FrameError):
        read_frames(tmp_path)
    with pytest.raises(FileNotFoundError):
        read_frames(tmp_path / "missing")


def test_yuv_round_trip_and_gray_axis(rng):
    arr = rng.uniform(size=(2, 4, 4, 3))
    v = ColorVideo.from_array(arr)
    y, u, w = rgb_to_yuv(v)
    np.testing.assert_allclose(yuv_to_rgb(y, u, w).to_array(), arr, atol=1e-6)
    gray = ColorVideo.from_array(np.repeat(arr[..., :1], 3, axis=-1))
    y, u, w = rgb_to_yuv(gray)
    np.testing.assert_allclose(y, arr[..., 0], atol=1e-12)
    np.testing.assert_allclose(u, 0.5, atol=1e-6)
    np.testing.assert_allclose(w, 0.5, atol=1e-6)
