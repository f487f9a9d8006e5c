"""Rain direction detection and the flip/transpose/row-shift normalization.

Angles are degrees from the vertical axis.  A positive angle means the top of
a streak leans right (``/``), so sliding row ``i`` by ``i*tan(angle)`` pixels
to the right makes it vertical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import ndimage

from derain.tensor import as_tensor3

DEFAULT_SWEEP = range(-89, 90)


class ShiftMode(Enum):
    NONE = "none"
    SHIFT_I = "shift1"  # row i (0-based) slides i pixels right
    SHIFT_II = "shift2"  # row i slides floor(i / 2) pixels right


@dataclass(frozen=True)
class ShiftPlan:
    flip_lr: bool = False
    transpose: bool = False
    shift_mode: ShiftMode = ShiftMode.NONE

    def row_offsets(self, rows: int) -> np.ndarray:
        """Rightward displacement of each row of a (normalized) frame."""
        i = np.arange(rows)
        if self.shift_mode is ShiftMode.SHIFT_I:
            return i
        if self.shift_mode is ShiftMode.SHIFT_II:
            return i // 2
        return np.zeros(rows, dtype=int)

    @property
    def is_identity(self) -> bool:
        return not (self.flip_lr or self.transpose) and self.shift_mode is ShiftMode.NONE


@dataclass
class AngleEstimate:
    theta_hat: float
    curve: list[tuple[float, float]] = field(default_factory=list)


def median_residual(O) -> np.ndarray:
    """``O`` minus its 3x3 median over every horizontal (column, frame) slice.

    Borders are padded by replication.
    """
    O = as_tensor3(O, "O")
    t, m, n = O.shape
    if n < 3 or t < 3:
        raise ValueError(f"need at least 3 columns and 3 frames, got n={n}, t={t}")
    return O - ndimage.median_filter(O, size=(3, 1, 3), mode="nearest")


def _rotation_coords(shape, theta: float):
    m, n = shape
    cr, cc = (m - 1) / 2.0, (n - 1) / 2.0
    rr, cc_grid = np.meshgrid(np.arange(m, dtype=float), np.arange(n, dtype=float), indexing="ij")
    x = cc_grid - cc
    y = cr - rr
    a = math.radians(theta)
    cos, sin = math.cos(a), math.sin(a)
    # pull back each output pixel through the inverse (clockwise) rotation
    xs = x * cos + y * sin
    ys = -x * sin + y * cos
    src_r = cr - ys
    src_c = cc + xs
    tol = 1e-9
    mask = (src_r >= -tol) & (src_r <= m - 1 + tol) & (src_c >= -tol) & (src_c <= n - 1 + tol)
    return src_r, src_c, mask


def rotate_frame(frame, theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Rotate a 2-D frame counterclockwise by ``theta`` degrees about its centre.

    Bilinear interpolation, zero outside the source.  Returns the rotated frame
    and a boolean mask of pixels whose source lies inside the frame.
    """
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 2:
        raise ValueError(f"expected a 2-D frame, got shape {frame.shape}")
    if theta == 0:
        return frame.copy(), np.ones(frame.shape, dtype=bool)
    src_r, src_c, mask = _rotation_coords(frame.shape, theta)
    out = ndimage.map_coordinates(frame, [src_r, src_c], order=1, mode="constant", cval=0.0)
    out[~mask] = 0.0
    return out, mask


def _inscribed_disc(shape) -> np.ndarray:
    """Pixels at least two pixels inside the disc inscribed in the frame.

    The disc maps onto itself under any rotation about the centre, so every
    sweep angle is scored on the same support.
    """
    m, n = shape
    cr, cc = (m - 1) / 2.0, (n - 1) / 2.0
    radius = (min(m, n) - 1) / 2.0 - 2.0
    rr, cgrid = np.meshgrid(np.arange(m), np.arange(n), indexing="ij")
    return (rr - cr) ** 2 + (cgrid - cc) ** 2 <= radius**2


def _shifted(padded: np.ndarray, pad: int, dr: float, dc: float, shape) -> np.ndarray:
    """Bilinear sample of every frame at ``(i + dr, j + dc)``.

    The offset is the same for all pixels, so the interpolation is a fixed
    blend of four integer shifts of the edge-padded volume.
    """
    _, m, n = shape
    r0, c0 = math.floor(dr), math.floor(dc)
    fr, fc = dr - r0, dc - c0
    out = np.zeros(shape)
    for a, wr in ((0, 1.0 - fr), (1, fr)):
        for b, wc in ((0, 1.0 - fc), (1, fc)):
            w = wr * wc
            if w == 0.0:
                continue
            i0, j0 = pad + r0 + a, pad + c0 + b
            out += w * padded[:, i0 : i0 + m, j0 : j0 + n]
    return out


def detect_angle(O, sweep=DEFAULT_SWEEP, frames=None, smoothing: float = 1.0) -> AngleEstimate:
    """Estimate the dominant streak angle of a video.

    For each candidate angle the rain residual left by a 3x3 median on
    horizontal slices is scored by the l1 norm of its vertical difference
    after rotating the frame by that angle.  The difference is evaluated on
    the source grid along the pulled-back direction ``(cos a, -sin a)``, which
    is the same quantity with a single interpolation.  A light isotropic
    Gaussian (``smoothing`` pixels) keeps interpolation blur from favouring
    any angle.  Ties go to the smaller magnitude.  ``frames`` optionally
    restricts the score to a subset of frame indices.
    """
    sweep = [float(a) for a in sweep]
    if not sweep:
        raise ValueError("angle sweep is empty")
    if any(not -90 < a < 90 for a in sweep):
        raise ValueError("sweep angles must lie in (-90, 90)")
    residual = median_residual(O)
    if frames is not None:
        residual = residual[list(frames)]
    if smoothing > 0:
        residual = ndimage.gaussian_filter(residual, (0, smoothing, smoothing), mode="nearest")
    pad = 2
    padded = np.pad(residual, ((0, 0), (pad, pad), (pad, pad)), mode="edge")
    disc = _inscribed_disc(residual.shape[1:])
    curve = []
    for theta in sweep:
        a = math.radians(theta)
        moved = _shifted(padded, pad, math.cos(a), -math.sin(a), residual.shape)
        curve.append((theta, float(np.abs(moved - residual)[:, disc].sum())))
    best = min(curve, key=lambda c: (c[1], abs(c[0]), c[0]))
    return AngleEstimate(theta_hat=best[0], curve=curve)


def plan_normalization(theta_hat: float) -> ShiftPlan:
    """Map a detected angle to the flip/transpose/shift that straightens it."""
    if not -90 < theta_hat < 90:
        raise ValueError(f"angle must lie in (-90, 90), got {theta_hat}")
    flip = theta_hat < 0
    theta = abs(theta_hat)
    transpose = theta > 45
    if transpose:
        theta = 90 - theta
    if theta < 15:
        mode = ShiftMode.NONE
    elif theta < 35:
        mode = ShiftMode.SHIFT_II
    else:
        mode = ShiftMode.SHIFT_I
    return ShiftPlan(flip_lr=flip, transpose=transpose, shift_mode=mode)


def _shift_rows(x: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    t, m, n = x.shape
    cols = (np.arange(n)[None, :] - offsets[:, None]) % n
    return x[:, np.arange(m)[:, None], cols]


def apply_plan(x, plan: ShiftPlan) -> np.ndarray:
    """Flip, transpose, then circularly slide rows of every frame."""
    out = as_tensor3(x)
    if plan.flip_lr:
        out = out[:, :, ::-1]
    if plan.transpose:
        out = out.transpose(0, 2, 1)
    if plan.shift_mode is not ShiftMode.NONE:
        out = _shift_rows(out, plan.row_offsets(out.shape[1]))
    return np.ascontiguousarray(out)


def invert_plan(x, plan: ShiftPlan) -> np.ndarray:
    out = as_tensor3(x)
    if plan.shift_mode is not ShiftMode.NONE:
        out = _shift_rows(out, -plan.row_offsets(out.shape[1]))
    if plan.transpose:
        out = out.transpose(0, 2, 1)
    if plan.flip_lr:
        out = out[:, :, ::-1]
    return np.ascontiguousarray(out)
