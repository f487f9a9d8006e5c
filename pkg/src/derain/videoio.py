"""Color conversion and on-disk formats (raw float volumes, image frame folders)."""

from __future__ import annotations

import os
import re
import struct
from pathlib import Path

import numpy as np
from PIL import Image

from derain.tensor import ColorVideo, as_tensor3

MAGIC = b"FDR1"
HEADER = struct.Struct("<4sIII")  # magic, m, n, t

# BT.601 full range; rows give Y, U - 0.5, V - 0.5
_RGB2YUV = np.array(
    [
        [0.299, 0.587, 0.114],
        [-0.168736, -0.331264, 0.5],
        [0.5, -0.418688, -0.081312],
    ]
)
_YUV2RGB = np.linalg.inv(_RGB2YUV)

FRAME_SUFFIXES = {".png", ".bmp", ".tif", ".tiff", ".pgm", ".ppm", ".jpg", ".jpeg"}


class TensorFileError(ValueError):
    """A raw tensor file is malformed."""


class BadMagicError(TensorFileError):
    pass


class TruncatedFileError(TensorFileError):
    pass


class FrameError(ValueError):
    """A frame directory is empty or inconsistent."""


def rgb_to_yuv(video: ColorVideo) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rgb = np.stack([video.r, video.g, video.b])
    yuv = np.tensordot(_RGB2YUV, rgb, axes=1)
    return yuv[0], yuv[1] + 0.5, yuv[2] + 0.5


def yuv_to_rgb(y, u, v) -> ColorVideo:
    """Inverse of :func:`rgb_to_yuv`; the result is clamped to [0, 1]."""
    yuv = np.stack([as_tensor3(y, "Y"), as_tensor3(u, "U") - 0.5, as_tensor3(v, "V") - 0.5])
    rgb = np.tensordot(_YUV2RGB, yuv, axes=1)
    return ColorVideo(rgb[0], rgb[1], rgb[2])


def write_raw(path, x) -> None:
    """Write a ``(t, m, n)`` volume as ``FDR1`` header + float32 LE payload."""
    x = as_tensor3(x)
    t, m, n = x.shape
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, m, n, t))
        fh.write(np.ascontiguousarray(x, dtype="<f4").tobytes())


def read_raw(path) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(HEADER.size)
        if len(head) < HEADER.size:
            raise TruncatedFileError(f"{path}: header is {len(head)} bytes, need {HEADER.size}")
        magic, m, n, t = HEADER.unpack(head)
        if magic != MAGIC:
            raise BadMagicError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
        count = m * n * t
        size = os.fstat(fh.fileno()).st_size - HEADER.size
        if size != 4 * count:
            raise TruncatedFileError(f"{path}: payload is {size} bytes, header promises {4 * count}")
        payload = fh.read()
    if count == 0:
        raise TensorFileError(f"{path}: empty volume {m}x{n}x{t}")
    data = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    try:
        return as_tensor3(data.reshape(t, m, n), str(path))
    except ValueError as exc:
        raise TensorFileError(str(exc)) from None


def _frame_files(directory: Path) -> list[Path]:
    files = [
        p for p in directory.iterdir()
        if p.is_file() and p.suffix.lower() in FRAME_SUFFIXES and re.fullmatch(r"\d+", p.stem)
    ]
    return sorted(files, key=lambda p: int(p.stem))


def read_frames(directory):
    """Load numbered 8-bit frames as a ``(t, m, n)`` array or a :class:`ColorVideo`.

    The result is grayscale only when every frame is single-channel.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"{directory}: not a directory")
    files = _frame_files(directory)
    if not files:
        raise FrameError(f"{directory}: no numbered frames found")
    images = []
    for f in files:
        with Image.open(f) as im:
            im.load()
            images.append((f, im.copy()))
    gray = all(im.mode in ("L", "1", "P") and _is_gray(im) for _, im in images)
    frames = []
    size = images[0][1].size
    for f, im in images:
        if im.size != size:
            raise FrameError(f"{f}: frame is {im.size[0]}x{im.size[1]}, expected {size[0]}x{size[1]}")
        frames.append(np.asarray(im.convert("L" if gray else "RGB"), dtype=np.float64) / 255.0)
    stack = np.stack(frames)
    if gray:
        return stack
    return ColorVideo.from_array(stack)


def _is_gray(im: Image.Image) -> bool:
    if im.mode != "P":
        return True
    rgb = np.asarray(im.convert("RGB"))
    return bool(np.all(rgb[..., 0] == rgb[..., 1]) and np.all(rgb[..., 1] == rgb[..., 2]))


def _to_bytes(x: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(x * 255.0), 0, 255).astype(np.uint8)


def write_frames(directory, video) -> list[Path]:
    """Write frames as zero-padded PNGs (``0000.png``, ...)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if isinstance(video, ColorVideo):
        data = _to_bytes(video.to_array())
    else:
        data = _to_bytes(as_tensor3(video))
    width = max(4, len(str(len(data) - 1)))
    paths = []
    for k, frame in enumerate(data):
        path = directory / f"{k:0{width}d}.png"
        Image.fromarray(frame).save(path)
        paths.append(path)
    return paths
