"""Video rain streak removal with directional gradient priors.

Volumes are numpy arrays of shape ``(t, m, n)``: frame, row, column.
"""

from derain.diffops import Axis, apply_diff, apply_diff_adjoint, normal_spectrum
from derain.geometry import (
    AngleEstimate,
    ShiftMode,
    ShiftPlan,
    apply_plan,
    detect_angle,
    invert_plan,
    plan_normalization,
)
from derain.metrics import QualityReport, psnr, quality_report, ssim_frame
from derain.shrinkage import ShrinkMode, soft_threshold
from derain.solver import DerainResult, DerainState, SolverParams, derain
from derain.tensor import ColorVideo, clamp_box, frobenius_norm, inner_product

__version__ = "0.1.0"

__all__ = [
    "AngleEstimate",
    "Axis",
    "ColorVideo",
    "DerainResult",
    "DerainState",
    "QualityReport",
    "ShiftMode",
    "ShiftPlan",
    "ShrinkMode",
    "SolverParams",
    "apply_diff",
    "apply_diff_adjoint",
    "apply_plan",
    "clamp_box",
    "derain",
    "detect_angle",
    "frobenius_norm",
    "inner_product",
    "invert_plan",
    "normal_spectrum",
    "plan_normalization",
    "psnr",
    "quality_report",
    "soft_threshold",
    "ssim_frame",
]
