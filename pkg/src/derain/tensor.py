"""Dense 3-mode volumes and the handful of reductions the solver needs.

A volume is a float64 ``numpy.ndarray`` of shape ``(t, m, n)``: ``t`` frames,
``m`` rows (vertical, y), ``n`` columns (horizontal, x).  In C order the
element ``(i, j, k)`` (row, column, frame) lives at offset ``(k*m + i)*n + j``,
which is also the payload order of the raw file format in :mod:`derain.videoio`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def as_tensor3(x, name: str = "tensor") -> np.ndarray:
    """Return ``x`` as a finite float64 array of shape ``(t, m, n)``."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 3:
        raise ValueError(f"{name} must be 3-D (t, m, n), got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


def dims(x: np.ndarray) -> tuple[int, int, int]:
    """``(m, n, t)`` of a ``(t, m, n)`` volume."""
    t, m, n = x.shape
    return m, n, t


def _check_same_shape(x: np.ndarray, y: np.ndarray) -> None:
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")


def frobenius_norm(x) -> float:
    x = as_tensor3(x)
    return float(np.sqrt(np.sum(x * x)))


def inner_product(x, y) -> float:
    x = as_tensor3(x, "x")
    y = as_tensor3(y, "y")
    _check_same_shape(x, y)
    return float(np.sum(x * y))


def clamp_box(x, upper) -> np.ndarray:
    """Project ``x`` elementwise onto the box ``[0, upper]``."""
    x = as_tensor3(x, "x")
    upper = as_tensor3(upper, "upper")
    _check_same_shape(x, upper)
    return np.minimum(np.maximum(x, 0.0), upper)


@dataclass
class ColorVideo:
    """An RGB video as three ``(t, m, n)`` planes clamped to [0, 1]."""

    r: np.ndarray
    g: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.r = np.clip(as_tensor3(self.r, "r"), 0.0, 1.0)
        self.g = np.clip(as_tensor3(self.g, "g"), 0.0, 1.0)
        self.b = np.clip(as_tensor3(self.b, "b"), 0.0, 1.0)
        if not (self.r.shape == self.g.shape == self.b.shape):
            raise ValueError(
                f"channel planes differ in shape: {self.r.shape}, {self.g.shape}, {self.b.shape}"
            )

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.r.shape

    @classmethod
    def from_array(cls, frames: np.ndarray) -> "ColorVideo":
        """Build from an array of shape ``(t, m, n, 3)``."""
        frames = np.asarray(frames, dtype=np.float64)
        if frames.ndim != 4 or frames.shape[-1] != 3:
            raise ValueError(f"expected (t, m, n, 3), got {frames.shape}")
        return cls(frames[..., 0], frames[..., 1], frames[..., 2])

    def to_array(self) -> np.ndarray:
        return np.stack([self.r, self.g, self.b], axis=-1)
