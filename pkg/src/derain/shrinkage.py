"""Soft thresholding, the proximal map of a weighted l1 norm."""

from __future__ import annotations

from enum import Enum

import numpy as np


class ShrinkMode(Enum):
    SIGNED = "signed"
    # a - v where a > v, else 0; zeroes every negative entry
    ONE_SIDED = "paper"


def soft_threshold(a, v: float, mode: ShrinkMode = ShrinkMode.SIGNED) -> np.ndarray:
    """Shrink ``a`` toward zero by ``v``.

    ``SIGNED`` is ``sign(a) * max(|a| - v, 0)``, the minimizer of
    ``v*|z| + (z - a)**2 / 2``.  ``ONE_SIDED`` keeps only the part above ``v``.
    """
    if v < 0:
        raise ValueError(f"threshold must be nonnegative, got {v}")
    a = np.asarray(a, dtype=np.float64)
    mode = ShrinkMode(mode)
    if mode is ShrinkMode.SIGNED:
        return np.copysign(np.maximum(np.abs(a) - v, 0.0), a)
    return np.where(a > v, a - v, 0.0)
