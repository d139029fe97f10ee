"""Stroboscopic sections and maximal Lyapunov exponents for the driven oscillator."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .symplectic import (IntegrationBlowup, StepperConfig, TangentVector, _wave,
                         _wave_advance, advance_steps, advance_tangent, step_schedule,
                         substep_weights)
from .system import DomainError, OscillatorParams, PhaseState

TWO_PI = 2.0 * math.pi

# initial-condition fan: positions x momentum factors (momenta scale with sqrt(epsilon))
FAN_POSITIONS = (0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi)
FAN_MOMENTUM_FACTORS = (0.5, 1.5, 3.0, 6.0)


class DegenerateTangent(ArithmeticError):
    pass


class SectionBlowup(IntegrationBlowup):
    def __init__(self, time: float, period_index: int):
        self.period_index = period_index
        super().__init__(time, f"integration blew up at t={time!r} during drive period {period_index}")


@dataclass(frozen=True)
class SectionPoint:
    u: float
    p: float

    def __post_init__(self):
        if not (0.0 <= self.u < TWO_PI and math.isfinite(self.p)):
            raise DomainError(f"invalid section point ({self.u!r}, {self.p!r})")


@dataclass(frozen=True)
class LyapunovEstimate:
    exponent: float
    horizon: float
    renorm_count: int

    def __post_init__(self):
        if not self.horizon > 0 or self.renorm_count < 1:
            raise DomainError("need horizon > 0 and renorm_count >= 1")


class RegimeLabel(str, Enum):
    REGULAR = "Regular"
    CHAOTIC = "Chaotic"
    UNCERTAIN = "Uncertain"


def initial_condition_fan(epsilon: float, positions: Sequence[float] = FAN_POSITIONS,
                          momentum_factors: Sequence[float] = FAN_MOMENTUM_FACTORS,
                          scale_momentum: bool = True) -> list[PhaseState]:
    """The 16-orbit fan, ordered position-major."""
    scale = math.sqrt(epsilon) if scale_momentum else 1.0
    return [PhaseState(q, f * scale, 0.0) for q in positions for f in momentum_factors]


def wrap_angle(x):
    u = np.mod(x, TWO_PI)
    # np.mod can round up to exactly 2 pi for tiny negative inputs
    return np.where(u >= TWO_PI, 0.0, u)


def section_array(params: OscillatorParams, state0: PhaseState, n_periods: int,
                  cfg: StepperConfig) -> np.ndarray:
    """(n_periods, 4) array of (t, q, p, u) at t_n = t0 + n T_d, n = 1..n_periods."""
    if n_periods < 1:
        raise DomainError("n_periods must be >= 1")
    period = params.drive_period
    if cfg.dt > period / 100.0:
        raise DomainError(f"dt={cfg.dt} does not resolve the drive period {period}")
    n_full, last = step_schedule(0.0, period, cfg.dt)
    wave = _wave(params)
    weights = substep_weights(cfg.order)
    no_samples = np.empty((0, 3))
    out = np.empty((n_periods, 4))
    q, p = state0.q, state0.p
    for n in range(n_periods):
        t_start = state0.t + n * period
        q, p, t, _, status = _wave_advance(q, p, t_start, cfg.dt, n_full, last,
                                           wave.stiffness, wave.amplitude, wave.wave_speed,
                                           wave.mass, weights, 1, no_samples)
        if status:
            raise SectionBlowup(t, n + 1)
        t = state0.t + (n + 1) * period
        out[n] = t, q, p, 0.0
    out[:, 3] = wrap_angle(out[:, 1] - params.omega * out[:, 0])
    return out


def poincare_section(params: OscillatorParams, state0: PhaseState, n_periods: int,
                     cfg: StepperConfig) -> list[SectionPoint]:
    """Stroboscopic samples ``(q - omega t mod 2 pi, p)`` once per drive period."""
    arr = section_array(params, state0, n_periods, cfg)
    return [SectionPoint(float(u), float(p)) for u, p in zip(arr[:, 3], arr[:, 2])]


def filled_fraction(u, p, bins: int = 50, p_range: tuple[float, float] | None = None) -> float:
    """Fraction of cells of a bins x bins grid over [0, 2 pi) x p_range that hold a point."""
    u = np.asarray(u, dtype=float)
    p = np.asarray(p, dtype=float)
    if u.size == 0:
        return 0.0
    if p_range is None:
        p_range = (float(p.min()), float(p.max()))
    lo, hi = p_range
    if hi <= lo:
        return 1.0 / (bins * bins)
    hist, _, _ = np.histogram2d(u, p, bins=bins, range=[[0.0, TWO_PI], [lo, hi]])
    return float(np.count_nonzero(hist)) / (bins * bins)


def _check_lyapunov_args(horizon, renorm_interval, dt):
    if not renorm_interval >= 10 * dt * (1 - 1e-12):
        raise DomainError(f"renorm_interval={renorm_interval} must be >= 10 dt")
    if not horizon >= 100 * renorm_interval * (1 - 1e-12):
        raise DomainError(f"horizon={horizon} must be >= 100 renorm_interval")
    n_ren = int(round(renorm_interval / dt))
    n_blocks = int(round(horizon / (n_ren * dt)))
    if abs(n_blocks * n_ren * dt - horizon) > 1e-9 * horizon:
        raise DomainError("horizon must be a whole number of renormalization intervals of whole steps")
    return n_ren, n_blocks


def lyapunov_max(params, state0: PhaseState, horizon: float, renorm_interval: float,
                 cfg: StepperConfig, tangent0: TangentVector | None = None) -> LyapunovEstimate:
    """Benettin estimate: propagate a unit tangent, renormalize every interval.

    ``exponent = sum(ln |v|) / horizon`` with ``|v|`` the Euclidean norm in (q, p).
    """
    n_ren, n_blocks = _check_lyapunov_args(horizon, renorm_interval, cfg.dt)
    v = (tangent0 or TangentVector(1.0, 0.0)).normalized()
    state = state0
    total = 0.0
    for i in range(n_blocks):
        # restart the time base each block: t = t0 + (i n_ren + j) dt
        state = PhaseState(state.q, state.p, state0.t + i * n_ren * cfg.dt)
        state, v = advance_tangent(params, state, v, n_ren, cfg)
        norm = v.norm
        if not norm > 1e-300:
            raise DegenerateTangent(f"tangent vector underflowed at t={state.t!r}")
        total += math.log(norm)
        v = TangentVector(v.dq / norm, v.dp / norm)
    return LyapunovEstimate(exponent=total / horizon, horizon=horizon, renorm_count=n_blocks)


def lyapunov_two_trajectory(params, state0: PhaseState, horizon: float, renorm_interval: float,
                            cfg: StepperConfig, delta: float = 1e-9,
                            direction: TangentVector | None = None) -> LyapunovEstimate:
    """Independent estimate from a shadow orbit kept at distance ``delta``."""
    n_ren, n_blocks = _check_lyapunov_args(horizon, renorm_interval, cfg.dt)
    d = (direction or TangentVector(1.0, 0.0)).normalized()
    a = state0
    b = PhaseState(state0.q + delta * d.dq, state0.p + delta * d.dp, state0.t)
    total = 0.0
    for i in range(n_blocks):
        t_start = state0.t + i * n_ren * cfg.dt
        a = advance_steps(params, PhaseState(a.q, a.p, t_start), n_ren, cfg)
        b = advance_steps(params, PhaseState(b.q, b.p, t_start), n_ren, cfg)
        t_stop = a.t
        dq, dp = b.q - a.q, b.p - a.p
        sep = math.hypot(dq, dp)
        if not sep > 0:
            raise DegenerateTangent(f"shadow orbit collapsed onto reference at t={t_stop!r}")
        total += math.log(sep / delta)
        b = PhaseState(a.q + delta * dq / sep, a.p + delta * dp / sep, a.t)
    return LyapunovEstimate(exponent=total / horizon, horizon=horizon, renorm_count=n_blocks)


def regime_thresholds(horizon: float) -> tuple[float, float]:
    """``(theta_regular, theta_chaotic) = (2, 5) * ln(T) / T``."""
    scale = math.log(horizon) / horizon
    return 2.0 * scale, 5.0 * scale


def classify(est: LyapunovEstimate) -> RegimeLabel:
    theta_r, theta_c = regime_thresholds(est.horizon)
    if est.exponent > theta_c:
        return RegimeLabel.CHAOTIC
    if est.exponent < theta_r:
        return RegimeLabel.REGULAR
    return RegimeLabel.UNCERTAIN
