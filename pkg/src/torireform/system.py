"""Forced harmonic oscillator in a plane wave, in its original and dual frames.

Original frame (strength ``epsilon``)::

    H = p**2/(2m) + omega0**2 q**2/2 - epsilon cos(q - omega t)

Dual frame (``alpha = epsilon/lambda_``, time ``tau = sqrt(lambda_) t``)::

    H' = p**2/(2m) - alpha cos(q - omega tau/sqrt(lambda_)) + omega0**2 q**2/(2 lambda_)

Both are members of one family, ``V(q, t) = s q**2/2 - b cos(q - c t)``, and the
fast integration kernels only ever see the three numbers ``(s, b, c)``.
All quantities are dimensionless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np


class DomainError(ValueError):
    """Parameters or arguments outside the supported domain."""


def _require_finite(**values: float) -> None:
    for name, v in values.items():
        if not math.isfinite(v):
            raise DomainError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class PhaseState:
    q: float
    p: float
    t: float = 0.0

    def __post_init__(self):
        _require_finite(q=self.q, p=self.p, t=self.t)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.q, self.p, self.t)


@dataclass(frozen=True)
class WaveCoefficients:
    """``V(q, t) = stiffness q**2/2 - amplitude cos(q - wave_speed t)``."""

    stiffness: float
    amplitude: float
    wave_speed: float
    mass: float = 1.0


class _WaveSystem:
    # shared evaluation for the two frames; subclasses supply ``coefficients``

    @property
    def coefficients(self) -> WaveCoefficients:  # pragma: no cover - abstract
        raise NotImplementedError

    def potential(self, q, t):
        c = self.coefficients
        return 0.5 * c.stiffness * q * q - c.amplitude * np.cos(q - c.wave_speed * t)

    def force(self, q, t):
        c = self.coefficients
        return -c.stiffness * q - c.amplitude * np.sin(q - c.wave_speed * t)

    def hessian(self, q, t):
        c = self.coefficients
        return c.stiffness + c.amplitude * np.cos(q - c.wave_speed * t)

    def hamiltonian(self, q, p, t):
        return 0.5 * p * p / self.coefficients.mass + self.potential(q, t)

    def max_frequency(self) -> float:
        """Largest of the externally imposed frequencies, for step-size sanity checks."""
        c = self.coefficients
        return max(abs(c.wave_speed), math.sqrt(abs(c.stiffness) / c.mass))


@dataclass(frozen=True)
class OscillatorParams(_WaveSystem):
    omega0: float
    omega: float
    epsilon: float
    mass: float = 1.0

    def __post_init__(self):
        _require_finite(omega0=self.omega0, omega=self.omega, epsilon=self.epsilon, mass=self.mass)
        # omega0 = 0 is allowed so free motion can be represented
        if self.omega0 < 0 or self.omega <= 0 or self.mass <= 0:
            raise DomainError(
                f"need omega0 >= 0, omega > 0, mass > 0 (got {self.omega0}, {self.omega}, {self.mass})"
            )
        if self.epsilon < 0:
            raise DomainError(f"epsilon must be non-negative, got {self.epsilon}")

    @property
    def coefficients(self) -> WaveCoefficients:
        return WaveCoefficients(self.omega0 * self.omega0, self.epsilon, self.omega, self.mass)

    @property
    def drive_period(self) -> float:
        return 2.0 * math.pi / self.omega


@dataclass(frozen=True)
class DualParams(_WaveSystem):
    alpha: float
    omega0: float
    omega: float
    lambda_: float
    mass: float = 1.0

    def __post_init__(self):
        _require_finite(alpha=self.alpha, omega0=self.omega0, omega=self.omega,
                        lambda_=self.lambda_, mass=self.mass)
        if self.alpha <= 0 or self.omega0 < 0 or self.omega <= 0 or self.lambda_ <= 0 or self.mass <= 0:
            raise DomainError(
                "need alpha, omega, lambda_, mass > 0 and omega0 >= 0, got "
                f"alpha={self.alpha}, omega0={self.omega0}, omega={self.omega}, lambda_={self.lambda_}"
            )

    @property
    def epsilon(self) -> float:
        return self.lambda_ * self.alpha

    @property
    def wave_speed(self) -> float:
        """Wave speed in dual time, ``omega/sqrt(lambda_)``."""
        return self.omega / math.sqrt(self.lambda_)

    @property
    def coefficients(self) -> WaveCoefficients:
        return WaveCoefficients(self.omega0 * self.omega0 / self.lambda_, self.alpha,
                                self.wave_speed, self.mass)

    def original(self) -> OscillatorParams:
        return OscillatorParams(self.omega0, self.omega, self.epsilon, self.mass)


Params = Union[OscillatorParams, DualParams]


def potential(params: Params, q, t):
    """Potential energy at position ``q`` and time ``t`` (dual time for DualParams)."""
    return params.potential(q, t)


def force(params: Params, q, t):
    """``-dV/dq``."""
    return params.force(q, t)


def hessian(params: Params, q, t):
    """``d2V/dq2``; the coefficient of the linearized (variational) dynamics."""
    return params.hessian(q, t)


def hamiltonian(params: Params, state: PhaseState) -> float:
    return float(params.hamiltonian(state.q, state.p, state.t))
