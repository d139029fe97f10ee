"""Rescaling map between the strongly driven frame and its weakly perturbed dual.

With ``p = sqrt(lam) p_dual``, ``tau = sqrt(lam) t`` and ``H = lam H'``, the
oscillator with wave strength ``epsilon`` becomes a pendulum of strength
``alpha = epsilon/lam`` perturbed by ``omega0**2 q**2 / (2 lam)``. Positions are
not rescaled, so the dual series carries momentum exponent 1/2 and position
exponent 0.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from .symplectic import StepperConfig, integrate_array
from .system import DomainError, DualParams, OscillatorParams, PhaseState


@dataclass(frozen=True)
class DualFrameMap:
    lambda_: float

    POSITION_EXPONENT: ClassVar[float] = 0.0
    MOMENTUM_EXPONENT: ClassVar[float] = 0.5

    def __post_init__(self):
        if not (math.isfinite(self.lambda_) and self.lambda_ > 0):
            raise DomainError(f"lambda_ must be positive, got {self.lambda_!r}")

    @property
    def sqrt_lambda(self) -> float:
        return math.sqrt(self.lambda_)


def _as_map(m) -> DualFrameMap:
    return m if isinstance(m, DualFrameMap) else DualFrameMap(float(m))


def to_dual(state: PhaseState, frame) -> PhaseState:
    """``(q, p, t) -> (q, p/sqrt(lam), sqrt(lam) t)``."""
    s = _as_map(frame).sqrt_lambda
    return PhaseState(state.q, state.p / s, state.t * s)


def from_dual(state: PhaseState, frame) -> PhaseState:
    s = _as_map(frame).sqrt_lambda
    return PhaseState(state.q, state.p * s, state.t / s)


def to_dual_arrays(t, q, p, frame):
    s = _as_map(frame).sqrt_lambda
    return t * s, q, p / s


def from_dual_arrays(tau, q, p_dual, frame):
    s = _as_map(frame).sqrt_lambda
    return tau / s, q, p_dual * s


def dual_params(params: OscillatorParams, lambda_: float, alpha_min: float = 0.0) -> DualParams:
    """Split ``epsilon = lambda_ * alpha`` at the caller's choice of ``lambda_``."""
    if params.epsilon == 0:
        raise DomainError("epsilon = 0 has no dual split")
    DualFrameMap(lambda_)
    alpha = params.epsilon / lambda_
    if alpha <= alpha_min:
        raise DomainError(f"alpha = epsilon/lambda_ = {alpha} is not above alpha_min = {alpha_min}")
    return DualParams(alpha=alpha, omega0=params.omega0, omega=params.omega,
                      lambda_=lambda_, mass=params.mass)


def check_trajectory_duality(params: OscillatorParams, lambda_: float, state0: PhaseState,
                             t_end: float, cfg: StepperConfig, sample_every: int = 1) -> float:
    """Max phase-space distance between the original flow and the mapped-back dual flow.

    The dual run uses step ``sqrt(lambda_) dt`` so sample n of both runs sits at
    the same physical time; no interpolation is involved. Returns
    ``max(|dq|, |dp|)`` over all aligned samples.
    """
    if t_end <= 0:
        raise DomainError("t_end must be positive")
    frame = DualFrameMap(lambda_)
    dparams = dual_params(params, lambda_)
    dual_cfg = StepperConfig(cfg.dt * frame.sqrt_lambda, cfg.order)
    dual0 = to_dual(state0, frame)

    with ThreadPoolExecutor(max_workers=2) as pool:
        orig_job = pool.submit(integrate_array, params, state0, state0.t + t_end, cfg, sample_every)
        dual_job = pool.submit(integrate_array, dparams, dual0,
                               dual0.t + t_end * frame.sqrt_lambda, dual_cfg, sample_every)
        orig, dual = orig_job.result(), dual_job.result()

    if orig.shape != dual.shape:
        raise RuntimeError(f"misaligned samples: {orig.shape} vs {dual.shape}")
    _, q_back, p_back = from_dual_arrays(dual[:, 0], dual[:, 1], dual[:, 2], frame)
    return float(max(np.max(np.abs(orig[:, 1] - q_back)), np.max(np.abs(orig[:, 2] - p_back))))


def hamiltonian_offset(params: OscillatorParams, lambda_: float, states) -> np.ndarray:
    """``lam * H'(to_dual(s)) - H(s)`` for each state; zero for an exact rescaling."""
    frame = DualFrameMap(lambda_)
    dparams = dual_params(params, lambda_)
    out = []
    for s in states:
        d = to_dual(s, frame)
        out.append(lambda_ * dparams.hamiltonian(d.q, d.p, d.t) - params.hamiltonian(s.q, s.p, s.t))
    return np.asarray(out, dtype=float)
