"""Detect -> normalize -> solve -> restore, on luma or full color video."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from derain.geometry import (
    DEFAULT_SWEEP,
    AngleEstimate,
    ShiftPlan,
    apply_plan,
    detect_angle,
    invert_plan,
    plan_normalization,
)
from derain.solver import DerainResult, SolverParams, derain
from derain.tensor import ColorVideo, as_tensor3
from derain.videoio import rgb_to_yuv, yuv_to_rgb

log = logging.getLogger(__name__)


@dataclass
class PipelineResult:
    B: np.ndarray
    R: np.ndarray
    solve: DerainResult
    plan: ShiftPlan
    angle: float
    estimate: AngleEstimate | None = None


def derain_luma(
    Y,
    params: SolverParams | None = None,
    angle: float | None = None,
    sweep=DEFAULT_SWEEP,
    detect_frames=None,
) -> PipelineResult:
    """Remove rain from a single-channel video.

    With ``angle=None`` the streak angle is detected first; pass ``angle=0``
    to solve in the original orientation.
    """
    Y = as_tensor3(Y, "Y")
    estimate = None
    if angle is None:
        estimate = detect_angle(Y, sweep=sweep, frames=detect_frames)
        angle = estimate.theta_hat
        log.info("detected streak angle %.0f deg", angle)
    plan = plan_normalization(angle)
    solve = derain(apply_plan(Y, plan), params)
    return PipelineResult(
        B=invert_plan(solve.B, plan),
        R=invert_plan(solve.R, plan),
        solve=solve,
        plan=plan,
        angle=float(angle),
        estimate=estimate,
    )


def derain_color(video: ColorVideo, params: SolverParams | None = None, **kwargs):
    """Derain the luma plane and recombine with the untouched chroma.

    Returns ``(background ColorVideo, luma rain layer, PipelineResult)``.
    """
    y, u, v = rgb_to_yuv(video)
    result = derain_luma(y, params, **kwargs)
    return yuv_to_rgb(result.B, u, v), result.R, result
