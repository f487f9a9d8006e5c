"""Procedural rain streaks and test scenes.

Streaks are drawn by scattering seed dots and convolving the dot field with an
oriented line (rendered with sub-pixel samples and bilinear splatting, i.e. an
anti-aliased motion-blur kernel), rescaled so that a dot of amplitude ``a``
paints about ``a * intensity`` per pixel along its streak.

Angles are in degrees from the vertical; positive angles lean the top of a
streak to the right (``/``), negative ones to the left (``\\``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from derain.tensor import as_tensor3


@dataclass(frozen=True)
class FixedPerFrame:
    """One streak angle per frame; a single value is reused for every frame."""

    angles: tuple[float, ...]

    def __init__(self, angles: float | Sequence[float]):
        if np.isscalar(angles):
            angles = (angles,)
        object.__setattr__(self, "angles", tuple(float(a) for a in angles))

    @classmethod
    def ramp(cls, lo: float, hi: float, frames: int) -> "FixedPerFrame":
        """Angle moving linearly from ``lo`` to ``hi`` over the frames."""
        return cls(tuple(np.linspace(lo, hi, frames)))

    def bounds(self):
        return min(self.angles), max(self.angles)


@dataclass(frozen=True)
class UniformRange:
    """Each streak draws its own angle uniformly from ``[lo, hi]``."""

    lo: float
    hi: float

    def bounds(self):
        return self.lo, self.hi


@dataclass(frozen=True)
class RainSpec:
    density: float
    length: int | tuple[int, int] = 9
    angle_mode: FixedPerFrame | UniformRange = FixedPerFrame(0.0)
    intensity: float = 0.8
    amplitude: tuple[float, float] = (0.6, 1.0)
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.density < 1:
            raise ValueError(f"density must lie in (0, 1), got {self.density}")
        lo_len, hi_len = _length_range(self.length)
        if lo_len < 2 or hi_len < lo_len:
            raise ValueError(f"streak length must be >= 2, got {self.length}")
        lo, hi = self.angle_mode.bounds()
        if not (-90 < lo <= hi < 90):
            raise ValueError(f"angles must lie in (-90, 90), got [{lo}, {hi}]")
        if not 0 <= self.intensity <= 1:
            raise ValueError(f"intensity must lie in [0, 1], got {self.intensity}")
        a_lo, a_hi = self.amplitude
        if not 0 <= a_lo <= a_hi <= 1:
            raise ValueError(f"amplitude range must satisfy 0 <= lo <= hi <= 1, got {self.amplitude}")


def _length_range(length) -> tuple[int, int]:
    if np.isscalar(length):
        return int(length), int(length)
    lo, hi = length
    return int(lo), int(hi)


def preset(name: str, frames: int, seed: int = 0) -> RainSpec:
    """Rain settings approximating the three synthetic rain types.

    ``case1``: light rain whose angle sweeps from -15 to 15 degrees over time.
    ``case2``: heavier rain with per-streak angles in [-15, 15].
    ``case3-like``: heavy rain with widely varying amplitudes and lengths; a
    procedural stand-in for photographed rain layers, not a reproduction.
    """
    if name == "case1":
        return RainSpec(0.03, 9, FixedPerFrame.ramp(-15, 15, frames), 0.8, (0.6, 1.0), seed)
    if name == "case2":
        return RainSpec(0.06, 11, UniformRange(-15, 15), 0.8, (0.6, 1.0), seed)
    if name == "case3-like":
        return RainSpec(0.08, (5, 21), UniformRange(-10, 10), 0.9, (0.2, 1.0), seed)
    raise ValueError(f"unknown preset {name!r}")


_SAMPLES_PER_PIXEL = 4


def line_samples(length: float, angle: float) -> tuple[np.ndarray, np.ndarray]:
    """Sub-pixel sample offsets ``(drow, dcol)`` along a centred segment.

    The segment spans ``length - 1`` pixels of Euclidean length, sampled
    ``_SAMPLES_PER_PIXEL`` times per pixel (plus both end points).
    """
    theta = math.radians(angle)
    steps = int(round((length - 1) * _SAMPLES_PER_PIXEL))
    u = np.linspace(-(length - 1) / 2, (length - 1) / 2, steps + 1)
    return u * math.cos(theta), -u * math.sin(theta)


def _splat(frame: np.ndarray, rows: np.ndarray, cols: np.ndarray, weights: np.ndarray) -> None:
    """Bilinearly deposit ``weights`` at fractional positions, wrapping at borders."""
    m, n = frame.shape
    r0 = np.floor(rows)
    c0 = np.floor(cols)
    fr = rows - r0
    fc = cols - c0
    r0 = r0.astype(int)
    c0 = c0.astype(int)
    for dr, wr in ((0, 1 - fr), (1, fr)):
        for dc, wc in ((0, 1 - fc), (1, fc)):
            np.add.at(frame, ((r0 + dr) % m, (c0 + dc) % n), weights * wr * wc)


def line_kernel(length: int, angle: float) -> np.ndarray:
    """Unit-mass anti-aliased kernel holding the oriented segment."""
    di, dj = line_samples(length, angle)
    half = int(math.ceil(max(np.abs(di).max(), np.abs(dj).max()))) + 1
    k = np.zeros((2 * half + 1, 2 * half + 1))
    _splat(k, di + half, dj + half, np.ones_like(di))
    return k / k.sum()


def simulate_rain(shape: tuple[int, int, int], spec: RainSpec) -> np.ndarray:
    """Rain layer of shape ``(t, m, n)`` with values in [0, 1].

    Frames are independent; each one scatters ``ceil(density*m*n)`` seed dots
    at random pixels and draws an anti-aliased streak through each (wrapping
    at the frame border).  Along an axis-aligned streak a dot of amplitude
    ``a`` paints ``a * intensity`` per pixel.
    """
    t, m, n = (int(s) for s in shape)
    if min(t, m, n) < 1:
        raise ValueError(f"shape must be positive, got {shape}")
    mode = spec.angle_mode
    if isinstance(mode, FixedPerFrame) and len(mode.angles) not in (1, t):
        raise ValueError(f"need 1 or {t} per-frame angles, got {len(mode.angles)}")
    count = math.ceil(spec.density * m * n)
    len_lo, len_hi = _length_range(spec.length)
    root = np.random.SeedSequence(spec.seed)
    out = np.zeros((t, m, n))
    for k, child in enumerate(root.spawn(t)):
        rng = np.random.default_rng(child)
        rows = rng.integers(0, m, count)
        cols = rng.integers(0, n, count)
        amps = rng.uniform(*spec.amplitude, count) * spec.intensity
        lengths = rng.integers(len_lo, len_hi + 1, count)
        if isinstance(mode, UniformRange):
            angles = rng.uniform(mode.lo, mode.hi, count)
        else:
            angles = np.full(count, mode.angles[k if len(mode.angles) > 1 else 0])
        for L in np.unique(lengths):
            sel = lengths == L
            u = np.linspace(-(L - 1) / 2, (L - 1) / 2, (L - 1) * _SAMPLES_PER_PIXEL + 1)
            theta = np.radians(angles[sel])[:, None]
            r = rows[sel, None] + u * np.cos(theta)
            c = cols[sel, None] - u * np.sin(theta)
            w = np.broadcast_to(amps[sel, None] / _SAMPLES_PER_PIXEL, r.shape)
            _splat(out[k], r.ravel(), c.ravel(), w.ravel())
    return np.clip(out, 0.0, 1.0)


def composite(background, rain, noise_sigma: float = 0.0, seed: int = 0) -> np.ndarray:
    """Rainy observation ``clip(B + R + N, 0, 1)`` with ``N ~ Normal(0, sigma)``."""
    background = as_tensor3(background, "background")
    rain = as_tensor3(rain, "rain")
    if background.shape != rain.shape:
        raise ValueError(f"dimension mismatch: {background.shape} vs {rain.shape}")
    if noise_sigma < 0:
        raise ValueError(f"noise_sigma must be >= 0, got {noise_sigma}")
    out = background + rain
    if noise_sigma > 0:
        out = out + np.random.default_rng(seed).normal(0.0, noise_sigma, out.shape)
    return np.clip(out, 0.0, 1.0)


def moving_gradient_scene(shape: tuple[int, int, int], seed: int = 0) -> np.ndarray:
    """A clean test video: a vertical ramp with slowly drifting texture and blocks.

    Intensity varies along both spatial axes (so it is never mistaken for
    vertical streaks), drifts about half a pixel per frame, and stays within
    [0.1, 0.7] so added streaks rarely saturate.
    """
    t, m, n = shape
    rng = np.random.default_rng(seed)
    ii, jj = np.meshgrid(np.arange(m), np.arange(n), indexing="ij")
    blocks = [
        (rng.integers(0, m), rng.integers(0, n), rng.integers(m // 6 + 1, m // 3 + 2),
         rng.integers(n // 6 + 1, n // 3 + 2), rng.uniform(-0.12, 0.12))
        for _ in range(3)
    ]
    frames = np.empty((t, m, n))
    for k in range(t):
        phase = 2 * np.pi * ((jj - 0.5 * k) / n + ii / m)
        base = 0.15 + 0.35 * ii / max(m - 1, 1) + 0.08 * np.sin(phase)
        for r0, c0, h, w, level in blocks:
            rows = (ii - r0) % m < h
            cols = (jj - c0 - k // 2) % n < w
            base = base + level * (rows & cols)
        frames[k] = base
    return np.clip(frames, 0.1, 0.7)
