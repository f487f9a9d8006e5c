"""PSNR over the whole video and frame-averaged SSIM."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import convolve2d

from derain.tensor import as_tensor3

WINDOW = 11
SIGMA = 1.5


@dataclass
class QualityReport:
    psnr: float
    ssim_mean: float
    ssim_per_frame: list[float] = field(default_factory=list)

    def as_text(self) -> str:
        return f"psnr={_fmt(self.psnr)}\nssim_mean={_fmt(self.ssim_mean)}"

    def csv_header(self) -> str:
        return "psnr,ssim_mean," + ",".join(
            f"ssim_{k}" for k in range(len(self.ssim_per_frame))
        )

    def csv_row(self) -> str:
        values = [self.psnr, self.ssim_mean, *self.ssim_per_frame]
        return ",".join(_fmt(v) for v in values)


def _fmt(v: float) -> str:
    return "inf" if math.isinf(v) else f"{v:.6f}"


def psnr(reference, test, peak: float = 1.0) -> float:
    """``10 log10(peak^2 / MSE)`` over every voxel; ``inf`` for identical inputs."""
    reference = as_tensor3(reference, "reference")
    test = as_tensor3(test, "test")
    if reference.shape != test.shape:
        raise ValueError(f"dimension mismatch: {reference.shape} vs {test.shape}")
    if peak <= 0:
        raise ValueError(f"peak must be positive, got {peak}")
    mse = float(np.mean((reference - test) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak**2 / mse)


def gaussian_window(size: int = WINDOW, sigma: float = SIGMA) -> np.ndarray:
    x = np.arange(size) - (size - 1) / 2
    g = np.exp(-(x**2) / (2 * sigma**2))
    w = np.outer(g, g)
    return w / w.sum()


def ssim_frame(reference, test, peak: float = 1.0) -> float:
    """Mean SSIM of two 2-D frames over all fully covered window positions.

    Gaussian 11x11 window with sigma 1.5, ``C1 = (0.01 peak)^2``,
    ``C2 = (0.03 peak)^2``.
    """
    x = np.asarray(reference, dtype=np.float64)
    y = np.asarray(test, dtype=np.float64)
    if x.ndim != 2 or x.shape != y.shape:
        raise ValueError(f"need two equal 2-D frames, got {x.shape} and {y.shape}")
    if min(x.shape) < WINDOW:
        raise ValueError(f"frame {x.shape} is smaller than the {WINDOW}x{WINDOW} window")
    w = gaussian_window()
    c1 = (0.01 * peak) ** 2
    c2 = (0.03 * peak) ** 2

    def filt(a):
        return convolve2d(a, w, mode="valid")

    mu_x, mu_y = filt(x), filt(y)
    var_x = filt(x * x) - mu_x * mu_x
    var_y = filt(y * y) - mu_y * mu_y
    cov = filt(x * y) - mu_x * mu_y
    num = (2 * mu_x * mu_y + c1) * (2 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def quality_report(reference, test, peak: float = 1.0) -> QualityReport:
    reference = as_tensor3(reference, "reference")
    test = as_tensor3(test, "test")
    per_frame = [ssim_frame(a, b, peak) for a, b in zip(reference, test)]
    return QualityReport(
        psnr=psnr(reference, test, peak),
        ssim_mean=float(np.mean(per_frame)),
        ssim_per_frame=per_frame,
    )
