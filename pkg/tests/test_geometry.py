import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from derain.geometry import (
    ShiftMode,
    ShiftPlan,
    apply_plan,
    detect_angle,
    invert_plan,
    median_residual,
    plan_normalization,
    rotate_frame,
)
from oracles import naive_median_residual
from scenes import flat_rain

ALL_PLANS = [
    ShiftPlan(f, tr, mode) for f in (False, True) for tr in (False, True) for mode in ShiftMode
]


def vertical_l1(frame, mask):
    both = mask[1:] & mask[:-1]
    return np.abs(np.diff(frame, axis=0))[both].sum()


def test_median_residual_matches_sorting_oracle(rng):
    O = rng.uniform(size=(4, 3, 6))
    np.testing.assert_allclose(median_residual(O), naive_median_residual(O), atol=1e-15)


def test_median_residual_needs_three_columns_and_frames():
    with pytest.raises(ValueError):
        median_residual(np.zeros((2, 5, 5)))
    with pytest.raises(ValueError):
        median_residual(np.zeros((5, 5, 2)))


def test_median_residual_isolates_single_bright_pixel():
    O = np.zeros((3, 3, 3))
    O[1, 1, 1] = 1.0
    r = median_residual(O)
    assert r[1, 1, 1] == 1.0 and np.count_nonzero(r) == 1


def test_rotate_zero_is_identity(rng):
    f = rng.uniform(size=(7, 9))
    out, mask = rotate_frame(f, 0)
    np.testing.assert_array_equal(out, f)
    assert mask.all()


def test_rotate_quarter_turn_is_counterclockwise(rng):
    f = rng.uniform(size=(9, 9))
    out, mask = rotate_frame(f, 90)
    assert mask.all()
    np.testing.assert_allclose(out, np.rot90(f), atol=1e-6)


def test_rotating_diagonal_line_upright_cuts_vertical_variation():
    m = 41
    i, j = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    line = np.exp(-((i - j) ** 2) / 4.0)  # "\" diagonal, Gaussian cross-section
    rotated, mask = rotate_frame(line, -45)
    assert vertical_l1(line, mask) >= 5 * vertical_l1(rotated, mask)


@pytest.mark.parametrize("theta", [-45, -30, 0, 30, 45])
def test_detects_simulated_streak_angle(theta):
    est = detect_angle(flat_rain(theta))
    assert abs(est.theta_hat - theta) <= 2
    if theta in (0, 45):
        assert est.theta_hat == theta
    assert len(est.curve) == 179


def test_detection_on_frame_subset():
    est = detect_angle(flat_rain(20), sweep=range(0, 41), frames=[0, 2, 4])
    assert abs(est.theta_hat - 20) <= 2


def test_flat_curve_prefers_smallest_magnitude():
    est = detect_angle(np.full((3, 16, 16), 0.5), sweep=[-10, 10, 5, -5])
    assert est.theta_hat == -5


def test_detect_rejects_bad_sweep():
    O = np.zeros((3, 8, 8))
    with pytest.raises(ValueError):
        detect_angle(O, sweep=[])
    with pytest.raises(ValueError):
        detect_angle(O, sweep=[90])


@pytest.mark.parametrize(
    "theta, plan",
    [
        (0, ShiftPlan(False, False, ShiftMode.NONE)),
        (14, ShiftPlan(False, False, ShiftMode.NONE)),
        (15, ShiftPlan(False, False, ShiftMode.SHIFT_II)),
        (20, ShiftPlan(False, False, ShiftMode.SHIFT_II)),
        (35, ShiftPlan(False, False, ShiftMode.SHIFT_I)),
        (40, ShiftPlan(False, False, ShiftMode.SHIFT_I)),
        (45, ShiftPlan(False, False, ShiftMode.SHIFT_I)),
        (-40, ShiftPlan(True, False, ShiftMode.SHIFT_I)),
        (-20, ShiftPlan(True, False, ShiftMode.SHIFT_II)),
        (60, ShiftPlan(False, True, ShiftMode.SHIFT_II)),
        (80, ShiftPlan(False, True, ShiftMode.NONE)),
        (-50, ShiftPlan(True, True, ShiftMode.SHIFT_I)),
    ],
)
def test_plan_normalization_table(theta, plan):
    assert plan_normalization(theta) == plan


def test_plan_rejects_out_of_range():
    with pytest.raises(ValueError):
        plan_normalization(90)


def test_shift_one_straightens_rising_diagonal():
    m = 8
    x = np.zeros((1, m, m))
    for i in range(m):
        x[0, i, m - 1 - i] = 1.0  # "/" line
    out = apply_plan(x, ShiftPlan(shift_mode=ShiftMode.SHIFT_I))
    assert out[0, :, m - 1].sum() == m


def test_shift_offsets():
    assert list(ShiftPlan(shift_mode=ShiftMode.SHIFT_II).row_offsets(5)) == [0, 0, 1, 1, 2]
    assert list(ShiftPlan(shift_mode=ShiftMode.SHIFT_I).row_offsets(3)) == [0, 1, 2]
    assert ShiftPlan().is_identity


def test_flip_and_transpose_steps(rng):
    x = rng.uniform(size=(2, 3, 4))
    np.testing.assert_array_equal(apply_plan(x, ShiftPlan(flip_lr=True)), x[:, :, ::-1])
    np.testing.assert_array_equal(apply_plan(x, ShiftPlan(transpose=True)), x.transpose(0, 2, 1))


@settings(max_examples=30)
@given(
    arrays(
        np.float64,
        st.tuples(st.integers(1, 3), st.integers(2, 9), st.integers(2, 9)),
        elements=st.floats(-1, 1),
    ),
    st.sampled_from(ALL_PLANS),
)
def test_plan_round_trip_is_bitwise(x, plan):
    y = apply_plan(x, plan)
    assert np.array_equal(invert_plan(y, plan), x)
    assert np.array_equal(np.sort(y.ravel()), np.sort(x.ravel()))
