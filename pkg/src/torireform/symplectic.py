"""Kick-drift-kick splitting for ``H = p**2/(2m) + V(q, t)`` and its tangent map.

Systems are duck-typed: anything with ``force(q, t)``, ``hessian(q, t)`` and a
``coefficients.mass`` (or ``mass``) attribute can be stepped. Systems that expose
``WaveCoefficients`` (the oscillator in either frame) are dispatched to compiled
kernels that perform the same arithmetic as the Python path.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numba
import numpy as np

from .system import DomainError, PhaseState, WaveCoefficients

BLOWUP_LIMIT = 1e12


class IntegrationBlowup(RuntimeError):
    def __init__(self, time: float, message: str = ""):
        self.time = time
        super().__init__(message or f"integration blew up at t={time!r} (|q| or |p| > {BLOWUP_LIMIT:g})")


class Order(str, Enum):
    STRANG2 = "Order2Strang"
    YOSHIDA4 = "Order4Yoshida"


_CBRT2 = 2.0 ** (1.0 / 3.0)
_YOSHIDA = (1.0 / (2.0 - _CBRT2), -_CBRT2 / (2.0 - _CBRT2), 1.0 / (2.0 - _CBRT2))


def substep_weights(order: Order) -> np.ndarray:
    """Fractions of ``dt`` taken by each Strang substep."""
    if Order(order) is Order.STRANG2:
        return np.array([1.0])
    return np.array(_YOSHIDA)


@dataclass(frozen=True)
class StepperConfig:
    dt: float
    order: Order = Order.STRANG2

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise DomainError(f"dt must be positive, got {self.dt!r}")
        object.__setattr__(self, "order", Order(self.order))

    def check_resolution(self, system) -> None:
        """Warn (never fail) when ``dt * max(omega, omega0) >= 0.5``."""
        freq = system.max_frequency() if hasattr(system, "max_frequency") else 0.0
        if self.dt * freq >= 0.5:
            warnings.warn(f"dt={self.dt} under-resolves frequency {freq}", RuntimeWarning, stacklevel=2)


@dataclass(frozen=True)
class TangentVector:
    dq: float
    dp: float

    def __post_init__(self):
        if not (math.isfinite(self.dq) and math.isfinite(self.dp)):
            raise DomainError("tangent vector must be finite")

    @property
    def norm(self) -> float:
        return math.hypot(self.dq, self.dp)

    def normalized(self) -> "TangentVector":
        n = self.norm
        if n == 0.0:
            raise DomainError("cannot normalize a zero tangent vector")
        return TangentVector(self.dq / n, self.dp / n)


def _mass(system) -> float:
    coeffs = getattr(system, "coefficients", None)
    if coeffs is not None:
        return coeffs.mass
    return getattr(system, "mass", 1.0)


def _wave(system) -> WaveCoefficients | None:
    coeffs = getattr(system, "coefficients", None)
    return coeffs if isinstance(coeffs, WaveCoefficients) else None


# --- generic (Python) path --------------------------------------------------


def _kdk(system, q, p, t0, t1, h, m):
    p = p + 0.5 * h * system.force(q, t0)
    q = q + h * p / m
    p = p + 0.5 * h * system.force(q, t1)
    return q, p


def _kdk_tangent(system, q, p, dq, dp, t0, t1, h, m):
    dp = dp - 0.5 * h * system.hessian(q, t0) * dq
    p = p + 0.5 * h * system.force(q, t0)
    q = q + h * p / m
    dq = dq + h * dp / m
    dp = dp - 0.5 * h * system.hessian(q, t1) * dq
    p = p + 0.5 * h * system.force(q, t1)
    return q, p, dq, dp


def _check(q, p, t):
    if not (abs(q) <= BLOWUP_LIMIT and abs(p) <= BLOWUP_LIMIT):
        raise IntegrationBlowup(t)


def strang_step(system, state: PhaseState, dt: float) -> PhaseState:
    """One kick-drift-kick step; first kick at ``t``, second at ``t + dt``."""
    t1 = state.t + dt
    q, p = _kdk(system, state.q, state.p, state.t, t1, dt, _mass(system))
    _check(q, p, t1)
    return PhaseState(float(q), float(p), t1)


def _substep_times(t: float, dt: float, weights) -> list[float]:
    times = [t]
    acc = 0.0
    for w in weights[:-1]:
        acc += w
        times.append(t + acc * dt)
    times.append(t + dt)
    return times


def yoshida_step(system, state: PhaseState, dt: float) -> PhaseState:
    """Fourth-order triple-jump composition of three Strang steps."""
    m = _mass(system)
    times = _substep_times(state.t, dt, _YOSHIDA)
    q, p = state.q, state.p
    for j, w in enumerate(_YOSHIDA):
        q, p = _kdk(system, q, p, times[j], times[j + 1], w * dt, m)
    _check(q, p, times[-1])
    return PhaseState(float(q), float(p), times[-1])


def step(system, state: PhaseState, dt: float, order: Order = Order.STRANG2) -> PhaseState:
    if Order(order) is Order.STRANG2:
        return strang_step(system, state, dt)
    return yoshida_step(system, state, dt)


def tangent_step(system, state: PhaseState, v: TangentVector, dt: float,
                 order: Order = Order.STRANG2) -> tuple[PhaseState, TangentVector]:
    """Advance ``state`` and the linearized displacement ``v`` together.

    The tangent update is the exact Jacobian of the discrete map, so the state
    part is bit-identical to :func:`step` with the same arguments.
    """
    m = _mass(system)
    weights = substep_weights(order)
    times = _substep_times(state.t, dt, weights) if len(weights) > 1 else [state.t, state.t + dt]
    q, p, dq, dp = state.q, state.p, v.dq, v.dp
    for j, w in enumerate(weights):
        h = dt if len(weights) == 1 else w * dt
        q, p, dq, dp = _kdk_tangent(system, q, p, dq, dp, times[j], times[j + 1], h, m)
    _check(q, p, times[-1])
    return PhaseState(float(q), float(p), times[-1]), TangentVector(float(dq), float(dp))


# --- compiled kernels for the wave family ------------------------------------


@numba.njit(cache=True, nogil=True)
def _wave_force(q, t, s, b, c):
    return -s * q - b * math.sin(q - c * t)


@numba.njit(cache=True, nogil=True)
def _wave_hess(q, t, s, b, c):
    return s + b * math.cos(q - c * t)


@numba.njit(cache=True, nogil=True)
def _wave_one_tangent(q, p, dq, dp, t, h, s, b, c, m, weights):
    nw = weights.shape[0]
    t0 = t
    acc = 0.0
    for j in range(nw):
        if nw == 1:
            hj = h
            t1 = t + h
        else:
            hj = weights[j] * h
            acc += weights[j]
            t1 = t + h if j == nw - 1 else t + acc * h
        dp = dp - 0.5 * hj * _wave_hess(q, t0, s, b, c) * dq
        p = p + 0.5 * hj * _wave_force(q, t0, s, b, c)
        q = q + hj * p / m
        dq = dq + hj * dp / m
        dp = dp - 0.5 * hj * _wave_hess(q, t1, s, b, c) * dq
        p = p + 0.5 * hj * _wave_force(q, t1, s, b, c)
        t0 = t1
    return q, p, dq, dp


@numba.njit(cache=True, nogil=True)
def _wave_one(q, p, t, h, s, b, c, m, weights):
    # shares machine code with the tangent step so the state update is bit-identical
    q, p, _, _ = _wave_one_tangent(q, p, 0.0, 0.0, t, h, s, b, c, m, weights)
    return q, p


@numba.njit(cache=True, nogil=True)
def _wave_advance(q, p, t0, dt, n_full, last_dt, s, b, c, m, weights, sample_every, out):
    """Advance n_full steps of dt then one step of last_dt (if > 0).

    Writes (t, q, p) rows into ``out`` every ``sample_every`` steps plus the
    final state when ``out`` has rows. Returns (q, p, t, n_rows, status).
    """
    rows = 0
    record = out.shape[0] > 0
    if record:
        out[0, 0] = t0
        out[0, 1] = q
        out[0, 2] = p
        rows = 1
    t = t0
    for i in range(n_full):
        q, p = _wave_one(q, p, t, dt, s, b, c, m, weights)
        t = t0 + (i + 1) * dt
        if not (abs(q) <= 1e12 and abs(p) <= 1e12):
            return q, p, t, rows, 1
        if record and ((i + 1) % sample_every == 0 or (i + 1 == n_full and last_dt <= 0.0)):
            out[rows, 0] = t
            out[rows, 1] = q
            out[rows, 2] = p
            rows += 1
    if last_dt > 0.0:
        t_end = t + last_dt
        q, p = _wave_one(q, p, t, last_dt, s, b, c, m, weights)
        t = t_end
        if not (abs(q) <= 1e12 and abs(p) <= 1e12):
            return q, p, t, rows, 1
        if record:
            out[rows, 0] = t
            out[rows, 1] = q
            out[rows, 2] = p
            rows += 1
    return q, p, t, rows, 0


@numba.njit(cache=True, nogil=True)
def _wave_advance_tangent(q, p, dq, dp, t0, dt, n_full, s, b, c, m, weights):
    t = t0
    for i in range(n_full):
        q, p, dq, dp = _wave_one_tangent(q, p, dq, dp, t, dt, s, b, c, m, weights)
        t = t0 + (i + 1) * dt
        if not (abs(q) <= 1e12 and abs(p) <= 1e12):
            return q, p, dq, dp, t, 1
    return q, p, dq, dp, t, 0


# --- schedules and trajectories ----------------------------------------------


def step_schedule(t0: float, t_end: float, dt: float) -> tuple[int, float]:
    """Number of full steps and the length of a final partial step landing on t_end."""
    span = t_end - t0
    if span < 0:
        raise DomainError(f"t_end={t_end} precedes t0={t0}")
    n_near = int(round(span / dt))
    if abs(n_near * dt - span) <= 1e-9 * dt:
        return n_near, 0.0
    n_full = int(math.floor(span / dt))
    return n_full, span - n_full * dt


def integrate_array(system, state0: PhaseState, t_end: float, cfg: StepperConfig,
                    sample_every: int = 1) -> np.ndarray:
    """Integrate to ``t_end``; returns an (n, 3) array of (t, q, p) samples.

    Samples are taken every ``sample_every`` full steps and always include the
    initial and final states; the final partial step lands exactly on ``t_end``.
    """
    if sample_every < 1:
        raise DomainError("sample_every must be a positive integer")
    n_full, last = step_schedule(state0.t, t_end, cfg.dt)
    weights = substep_weights(cfg.order)
    n_rows = 2 + n_full // sample_every
    wave = _wave(system)
    if wave is not None:
        out = np.empty((n_rows, 3))
        q, p, t, rows, status = _wave_advance(
            state0.q, state0.p, state0.t, cfg.dt, n_full, last,
            wave.stiffness, wave.amplitude, wave.wave_speed, wave.mass, weights, sample_every, out)
        if status:
            raise IntegrationBlowup(t)
        return out[:rows]
    return _integrate_python(system, state0, cfg, n_full, last, sample_every, n_rows)


def _integrate_python(system, state0, cfg, n_full, last, sample_every, n_rows):
    m = _mass(system)
    weights = list(substep_weights(cfg.order))
    out = np.empty((n_rows, 3))
    out[0] = state0.as_tuple()[2], state0.q, state0.p
    rows = 1
    q, p, t0 = state0.q, state0.p, state0.t

    def one(q, p, t, h):
        times = _substep_times(t, h, weights) if len(weights) > 1 else [t, t + h]
        for j, w in enumerate(weights):
            hj = h if len(weights) == 1 else w * h
            q, p = _kdk(system, q, p, times[j], times[j + 1], hj, m)
        return q, p

    t = t0
    for i in range(n_full):
        q, p = one(q, p, t, cfg.dt)
        t = t0 + (i + 1) * cfg.dt
        _check(q, p, t)
        if (i + 1) % sample_every == 0 or (i + 1 == n_full and last == 0.0):
            out[rows] = t, q, p
            rows += 1
    if last > 0.0:
        q, p = one(q, p, t, last)
        t = t + last
        _check(q, p, t)
        out[rows] = t, q, p
        rows += 1
    return out[:rows]


def integrate_trajectory(system, state0: PhaseState, t_end: float, cfg: StepperConfig,
                         sample_every: int = 1) -> list[PhaseState]:
    if t_end == state0.t:
        return [state0]
    arr = integrate_array(system, state0, t_end, cfg, sample_every)
    return [PhaseState(float(q), float(p), float(t)) for t, q, p in arr]


def advance_tangent(system, state: PhaseState, v: TangentVector, n_steps: int,
                    cfg: StepperConfig) -> tuple[PhaseState, TangentVector]:
    """``n_steps`` applications of :func:`tangent_step` (compiled for wave systems)."""
    wave = _wave(system)
    if wave is None:
        for _ in range(n_steps):
            state, v = tangent_step(system, state, v, cfg.dt, cfg.order)
        return state, v
    q, p, dq, dp, t, status = _wave_advance_tangent(
        state.q, state.p, v.dq, v.dp, state.t, cfg.dt, n_steps,
        wave.stiffness, wave.amplitude, wave.wave_speed, wave.mass, substep_weights(cfg.order))
    if status:
        raise IntegrationBlowup(t)
    if not (math.isfinite(dq) and math.isfinite(dp)):
        raise IntegrationBlowup(t, f"tangent vector overflowed at t={t!r}")
    return PhaseState(q, p, t), TangentVector(dq, dp)


def advance_steps(system, state: PhaseState, n_steps: int, cfg: StepperConfig) -> PhaseState:
    """``n_steps`` full steps, times ``t0 + i dt``; no sampling."""
    wave = _wave(system)
    if wave is None:
        arr = _integrate_python(system, state, cfg, n_steps, 0.0, max(n_steps, 1), 3)
        t, q, p = arr[-1]
        return PhaseState(float(q), float(p), float(t))
    q, p, t, _, status = _wave_advance(
        state.q, state.p, state.t, cfg.dt, n_steps, 0.0,
        wave.stiffness, wave.amplitude, wave.wave_speed, wave.mass,
        substep_weights(cfg.order), 1, np.empty((0, 3)))
    if status:
        raise IntegrationBlowup(t)
    return PhaseState(q, p, t)


def self_convergence_ratio(system, state0: PhaseState, t_end: float, dt: float,
                           order: Order = Order.STRANG2, refine: int = 64) -> float:
    """Ratio err(dt) / err(dt/2), errors taken against a ``dt/refine`` reference.

    Errors are the max over all common sample times of max(|dq|, |dp|). A
    method of global order r gives a ratio near 2**r.
    """
    if refine < 4 or refine % 2:
        raise DomainError("refine must be an even integer >= 4")
    n_full, last = step_schedule(state0.t, t_end, dt)
    if last != 0.0:
        raise DomainError("t_end - t0 must be a whole number of steps")

    def run(h, every):
        return integrate_array(system, state0, t_end, StepperConfig(h, order), every)

    ref = run(dt / refine, refine)
    coarse = run(dt, 1)
    fine = run(dt / 2, 2)
    e1 = np.abs(coarse[:, 1:] - ref[:, 1:]).max()
    e2 = np.abs(fine[:, 1:] - ref[:, 1:]).max()
    return float(e1 / e2)
