"""Split augmented Lagrangian solver for the rain/background decomposition.

The observed luma volume ``O`` is split into a background ``B`` and a rain
layer ``R`` by minimizing

    a1*|D_v R|_1 + a2*|R|_1 + a3*|D_h B|_1 + a4*|D_t B|_1 + |O - B - R|^2 / 2

subject to ``0 <= B <= O`` and ``0 <= R <= O``, where ``D_v``, ``D_h`` and
``D_t`` are circular first differences along rows, columns and frames.
Each l1 term gets an auxiliary variable ``V_i`` with a scaled multiplier
``D_i``; the quadratic ``B`` and ``R`` subproblems are diagonal in the 3-D DFT.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from derain.diffops import Axis, apply_diff, apply_diff_adjoint, normal_spectrum
from derain.shrinkage import ShrinkMode, soft_threshold
from derain.tensor import as_tensor3, clamp_box

log = logging.getLogger(__name__)

_EPS = 1e-12


@dataclass(frozen=True)
class SolverParams:
    """Regularization weights and loop controls.

    ``alpha`` orders the weights as (vertical gradient of rain, sparsity of
    rain, horizontal gradient of background, temporal gradient of background).
    """

    alpha: tuple[float, float, float, float] = (0.01, 1e-5, 1e-5, 0.01)
    mu: float = 1.0
    tol: float = 1e-4
    max_iter: int = 100
    mode: ShrinkMode = ShrinkMode.SIGNED

    def __post_init__(self):
        alpha = tuple(float(a) for a in self.alpha)
        if len(alpha) != 4:
            raise ValueError(f"alpha needs four weights, got {len(alpha)}")
        if any(not np.isfinite(a) or a < 0 for a in alpha):
            raise ValueError(f"alpha weights must be finite and >= 0, got {alpha}")
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if int(self.max_iter) < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "max_iter", int(self.max_iter))
        object.__setattr__(self, "mode", ShrinkMode(self.mode))


@dataclass(frozen=True)
class IterationRecord:
    rel_change: float
    # |D_v R - V1|, |R - V2|, |D_h B - V3|, |D_t B - V4| (Frobenius)
    residuals: tuple[float, float, float, float]


@dataclass
class DerainState:
    O: np.ndarray
    B: np.ndarray
    R: np.ndarray
    V: list[np.ndarray]
    D: list[np.ndarray]
    iter: int = 0
    history: list[IterationRecord] = field(default_factory=list)
    # split terms cached with the (B, R) arrays they were computed from
    cache: tuple | None = field(default=None, repr=False)


@dataclass
class DerainResult:
    B: np.ndarray
    R: np.ndarray
    iterations: int
    converged: bool
    history: list[IterationRecord]


def init_state(O) -> DerainState:
    """Start from ``B = O`` and all other variables zero."""
    O = as_tensor3(O, "O")
    if np.any(O < 0):
        raise ValueError("observed video must be elementwise nonnegative")
    zeros = [np.zeros_like(O) for _ in range(4)]
    return DerainState(
        O=O,
        B=O.copy(),
        R=np.zeros_like(O),
        V=zeros,
        D=[np.zeros_like(O) for _ in range(4)],
    )


def _constraint_terms(state: DerainState) -> list[np.ndarray]:
    """The four split operators applied to the current ``B``/``R``."""
    return [
        apply_diff(state.R, Axis.VERTICAL),
        state.R,
        apply_diff(state.B, Axis.HORIZONTAL),
        apply_diff(state.B, Axis.TEMPORAL),
    ]


def constraint_residuals(state: DerainState) -> tuple[float, float, float, float]:
    terms = _constraint_terms(state)
    return tuple(float(np.linalg.norm(a - v)) for a, v in zip(terms, state.V))


def update_auxiliaries(state: DerainState, params: SolverParams, terms=None) -> list[np.ndarray]:
    """``V_i = S_{alpha_i/mu}(A_i + D_i)`` for each split term ``A_i``.

    ``terms`` may pass in the split terms of the current ``B``/``R``.
    """
    if terms is None:
        terms = _constraint_terms(state)
    state.V = [
        soft_threshold(a + d, alpha / params.mu, params.mode)
        for a, d, alpha in zip(terms, state.D, params.alpha)
    ]
    return state.V


def _fft_solve(rhs: np.ndarray, denom: np.ndarray) -> np.ndarray:
    # denom is real and even in frequency, so the half spectrum suffices
    half = denom[..., : rhs.shape[-1] // 2 + 1]
    return np.fft.irfftn(np.fft.rfftn(rhs) / half, s=rhs.shape, axes=(0, 1, 2))


def _background_denominator(shape, mu: float) -> np.ndarray:
    return 1.0 + mu * (
        normal_spectrum(Axis.HORIZONTAL, shape) + normal_spectrum(Axis.TEMPORAL, shape)
    )


def _rain_denominator(shape, mu: float) -> np.ndarray:
    return 1.0 + mu + mu * normal_spectrum(Axis.VERTICAL, shape)


def solve_background(state: DerainState, params: SolverParams, denom=None) -> np.ndarray:
    """Unconstrained minimizer of the ``B`` subproblem (before clamping)."""
    mu = params.mu
    rhs = apply_diff_adjoint(state.V[2] - state.D[2], Axis.HORIZONTAL)
    rhs += apply_diff_adjoint(state.V[3] - state.D[3], Axis.TEMPORAL)
    rhs *= mu
    rhs += state.O
    rhs -= state.R
    if denom is None:
        denom = _background_denominator(rhs.shape, mu)
    return _fft_solve(rhs, denom)


def solve_rain(state: DerainState, params: SolverParams, denom=None) -> np.ndarray:
    """Unconstrained minimizer of the ``R`` subproblem (before clamping)."""
    mu = params.mu
    rhs = apply_diff_adjoint(state.V[0] - state.D[0], Axis.VERTICAL)
    rhs += state.V[1]
    rhs -= state.D[1]
    rhs *= mu
    rhs += state.O
    rhs -= state.B
    if denom is None:
        denom = _rain_denominator(rhs.shape, mu)
    return _fft_solve(rhs, denom)


def update_background(state: DerainState, params: SolverParams, denom=None) -> np.ndarray:
    state.B = clamp_box(solve_background(state, params, denom), state.O)
    return state.B


def update_rain(state: DerainState, params: SolverParams, denom=None) -> np.ndarray:
    state.R = clamp_box(solve_rain(state, params, denom), state.O)
    return state.R


def update_multipliers(state: DerainState, terms=None) -> list[np.ndarray]:
    """``D_i += A_i - V_i``; returns the increments."""
    if terms is None:
        terms = _constraint_terms(state)
    steps = [a - v for a, v in zip(terms, state.V)]
    state.D = [d + s for d, s in zip(state.D, steps)]
    return steps


def step(state: DerainState, params: SolverParams, denoms=None) -> IterationRecord:
    """Run one full iteration and append its record to ``state.history``."""
    if denoms is None:
        denoms = (
            _background_denominator(state.O.shape, params.mu),
            _rain_denominator(state.O.shape, params.mu),
        )
    B_prev = state.B
    terms = None
    if state.cache is not None and state.cache[0] is state.B and state.cache[1] is state.R:
        terms = state.cache[2]
    update_auxiliaries(state, params, terms)
    update_background(state, params, denoms[0])
    update_rain(state, params, denoms[1])
    terms = _constraint_terms(state)
    state.cache = (state.B, state.R, terms)
    steps = update_multipliers(state, terms)
    rel = float(np.linalg.norm(state.B - B_prev) / max(np.linalg.norm(B_prev), _EPS))
    record = IterationRecord(
        rel_change=rel,
        residuals=tuple(float(np.linalg.norm(s)) for s in steps),
    )
    state.iter += 1
    state.history.append(record)
    return record


def derain(O, params: SolverParams | None = None) -> DerainResult:
    """Separate ``O`` into background and rain layers.

    Iterates until the relative change of ``B`` drops below ``params.tol``
    or ``params.max_iter`` iterations have run.
    """
    params = params or SolverParams()
    state = init_state(O)
    denoms = (
        _background_denominator(state.O.shape, params.mu),
        _rain_denominator(state.O.shape, params.mu),
    )
    converged = False
    while state.iter < params.max_iter:
        record = step(state, params, denoms)
        if not (np.isfinite(record.rel_change) and all(np.isfinite(record.residuals))):
            raise FloatingPointError(f"non-finite iterate at iteration {state.iter}")
        log.debug(
            "iter %d rel_change %.3e residuals %s",
            state.iter,
            record.rel_change,
            ", ".join(f"{r:.3e}" for r in record.residuals),
        )
        if record.rel_change < params.tol:
            converged = True
            break
    return DerainResult(
        B=state.B,
        R=state.R,
        iterations=state.iter,
        converged=converged,
        history=state.history,
    )
