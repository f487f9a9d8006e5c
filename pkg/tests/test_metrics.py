import math

import numpy as np
import pytest
from skimage.metrics import structural_similarity

from derain.metrics import gaussian_window, psnr, quality_report, ssim_frame


def loop_mse(a, b):
    total = 0.0
    for x, y in zip(a.ravel(), b.ravel()):
        total += (x - y) ** 2
    return total / a.size


def test_psnr_against_loop_mse(rng):
    a = rng.uniform(size=(2, 8, 8))
    b = np.clip(a + rng.normal(0, 0.05, a.shape), 0, 1)
    assert psnr(a, b) == pytest.approx(10 * math.log10(1 / loop_mse(a, b)), rel=1e-12)


def test_psnr_examples():
    a = np.zeros((1, 4, 4))
    assert psnr(a, a) == math.inf
    assert psnr(a, np.full_like(a, 0.1)) == pytest.approx(20.0)
    assert psnr(a, np.full_like(a, 25.5), peak=255) == pytest.approx(20.0)
    with pytest.raises(ValueError):
        psnr(a, np.zeros((1, 4, 5)))


def test_ssim_matches_reference_implementation(rng):
    a = rng.uniform(size=(24, 30))
    b = np.clip(a + rng.normal(0, 0.1, a.shape), 0, 1)
    expected = structural_similarity(
        a, b, gaussian_weights=True, sigma=1.5, use_sample_covariance=False, data_range=1.0
    )
    assert ssim_frame(a, b) == pytest.approx(expected, abs=1e-9)


def test_ssim_identity_and_symmetry(rng):
    a = rng.uniform(size=(16, 16))
    b = rng.uniform(size=(16, 16))
    assert ssim_frame(a, a) == pytest.approx(1.0)
    assert ssim_frame(a, b) == pytest.approx(ssim_frame(b, a))
    assert ssim_frame(a, b) < 0.5


def test_ssim_rejects_small_frames():
    with pytest.raises(ValueError, match="window"):
        ssim_frame(np.zeros((8, 20)), np.zeros((8, 20)))


def test_window_is_normalized():
    w = gaussian_window()
    assert w.shape == (11, 11)
    assert w.sum() == pytest.approx(1.0)


def test_quality_report_text_and_csv(rng):
    a = rng.uniform(size=(3, 12, 12))
    rep = quality_report(a, a)
    assert rep.as_text() == "psnr=inf\nssim_mean=1.000000"
    assert rep.csv_header() == "psnr,ssim_mean,ssim_0,ssim_1,ssim_2"
    assert rep.csv_row().startswith("inf,1.000000,")
    noisy = quality_report(a, np.clip(a + 0.05, 0, 1))
    assert noisy.ssim_mean == pytest.approx(np.mean(noisy.ssim_per_frame))
