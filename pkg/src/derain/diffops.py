"""Circular first differences along the three axes of a video volume."""

from __future__ import annotations

from enum import Enum

import numpy as np

from derain.tensor import as_tensor3


class Axis(Enum):
    """Difference direction; the value is the numpy axis of a ``(t, m, n)`` array."""

    VERTICAL = 1
    HORIZONTAL = 2
    TEMPORAL = 0


def _check_extent(x: np.ndarray, axis: Axis) -> None:
    if x.shape[axis.value] < 2:
        raise ValueError(
            f"{axis.name.lower()} extent is {x.shape[axis.value]}, need at least 2"
        )


def apply_diff(x, axis: Axis) -> np.ndarray:
    """Forward difference with periodic boundary: ``x[i+1 mod L] - x[i]``."""
    x = as_tensor3(x)
    _check_extent(x, axis)
    return np.roll(x, -1, axis=axis.value) - x


def apply_diff_adjoint(y, axis: Axis) -> np.ndarray:
    """Transpose of :func:`apply_diff`: ``y[i-1 mod L] - y[i]``."""
    y = as_tensor3(y)
    _check_extent(y, axis)
    return np.roll(y, 1, axis=axis.value) - y


def normal_spectrum(axis: Axis, shape: tuple[int, int, int]) -> np.ndarray:
    """Eigenvalues of ``D^T D`` on the 3-D DFT grid of a ``(t, m, n)`` volume.

    The circular difference along an axis of length ``L`` has DFT symbol
    ``1 - exp(-2j*pi*f/L)``; its squared modulus ``2 - 2 cos(2 pi f / L)`` is
    broadcast over the remaining two axes.
    """
    shape = tuple(int(s) for s in shape)
    if len(shape) != 3 or min(shape) < 1:
        raise ValueError(f"shape must be three positive extents, got {shape}")
    length = shape[axis.value]
    f = np.arange(length)
    eig = 2.0 - 2.0 * np.cos(2.0 * np.pi * f / length)
    view = [1, 1, 1]
    view[axis.value] = length
    return np.broadcast_to(eig.reshape(view), shape).copy()
