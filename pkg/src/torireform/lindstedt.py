"""Leading and next-to-leading order of the strong-coupling (dual) Lindstedt series.

In dual time the leading order is a rotating pendulum carried along by the wave::

    q0(tau) = s tau + 2 am(Omega tau + phi, k),   s = omega/sqrt(lam)
    Omega   = sqrt(2 alpha (1 + A) + omega**2) / 2,  k = sqrt(alpha)/Omega

and the first correction obeys the Hill-type equation::

    q1'' + alpha (1 - 2 sn**2(Omega tau + phi, k)) q1 = -omega0**2 q0(tau)
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .elliptic import (EllipticModulus, am_inverse, jacobi_am_periodic, jacobi_am_unwrapped,
                       jacobi_sncndn)
from .symplectic import Order, StepperConfig, integrate_array
from .system import DomainError, DualParams, PhaseState

# warn when the modulus-smallness condition k**2 << 1 is visibly violated
MODULUS_WARNING_K2 = 0.25


class BranchError(DomainError):
    """Orbit outside the forward-rotating branch covered by the closed form."""


@dataclass(frozen=True)
class PendulumOrbitConstants:
    A: float
    phi: float
    k: EllipticModulus
    Omega: float

    def __post_init__(self):
        if not (self.Omega > 0 and math.isfinite(self.Omega)):
            raise DomainError(f"Omega must be positive, got {self.Omega!r}")

    @classmethod
    def from_A(cls, params: DualParams, A: float, phi: float = 0.0) -> "PendulumOrbitConstants":
        big = 2.0 * params.alpha * (1.0 + A) + params.omega ** 2
        if big <= 4.0 * params.alpha:
            raise BranchError(f"A={A} gives a librating orbit (k >= 1)")
        k = math.sqrt(4.0 * params.alpha / big)
        return cls(A=A, phi=phi, k=EllipticModulus(k), Omega=0.5 * math.sqrt(big))


def comoving_energy(params: DualParams, q0: float, p0_dual: float) -> float:
    """Pendulum energy in the frame moving with the wave."""
    v = p0_dual - params.wave_speed
    return 0.5 * v * v - params.alpha * math.cos(q0)


def constants_from_ic(params: DualParams, q0: float, p0_dual: float) -> PendulumOrbitConstants:
    """Fix ``(A, phi)`` from a dual-frame initial condition at ``tau = 0``.

    Substituting the closed form into the co-moving energy gives
    ``E = alpha A + omega**2/2``; ``phi`` inverts ``2 am(phi, k) = q0``.
    The closed form only rotates forward (``dn > 0`` for ``k < 1``), so both
    librating orbits (``E <= alpha``) and counter-rotating ones are rejected.
    """
    energy = comoving_energy(params, q0, p0_dual)
    if energy <= params.alpha:
        raise BranchError(f"co-moving energy {energy} <= alpha={params.alpha}: librating orbit")
    if p0_dual - params.wave_speed <= 0:
        raise BranchError("orbit rotates against the wave; closed form has dn > 0 only")
    A = (energy - 0.5 * params.omega ** 2) / params.alpha
    c = PendulumOrbitConstants.from_A(params, A)
    phi = am_inverse(0.5 * q0, c.k)
    return replace(c, phi=phi)


def leading_order_state(params: DualParams, c: PendulumOrbitConstants, tau):
    """Closed-form ``(q0, p0_dual)``; broadcasts over ``tau``."""
    tau = np.asarray(tau, dtype=float)
    x = c.Omega * tau + c.phi
    q = params.wave_speed * tau + 2.0 * jacobi_am_unwrapped(x, c.k)
    _, _, dn = jacobi_sncndn(x, c.k)
    p = params.wave_speed + 2.0 * c.Omega * np.asarray(dn)
    if tau.ndim == 0:
        return float(q), float(p)
    return q, p


def leading_order_residual(params: DualParams, c: PendulumOrbitConstants,
                           tau_grid: Sequence[float]) -> float:
    """Max |D2 q0 + alpha sin(q0 - s tau)| over interior points of a uniform grid."""
    tau = np.asarray(tau_grid, dtype=float)
    if tau.ndim != 1 or tau.size < 3:
        raise DomainError("tau_grid needs at least 3 points")
    h = tau[1] - tau[0]
    if h <= 0 or not np.allclose(np.diff(tau), h, rtol=1e-9, atol=0.0):
        raise DomainError("tau_grid must be uniformly spaced and increasing")
    # q0 = (linear in tau) + 2 * bounded part; D2 annihilates the linear part
    x = c.Omega * tau + c.phi
    g = 2.0 * jacobi_am_periodic(x, c.k)
    d2 = (g[2:] - 2.0 * g[1:-1] + g[:-2]) / (h * h)
    res = d2 + params.alpha * np.sin(2.0 * jacobi_am_unwrapped(x[1:-1], c.k))
    return float(np.max(np.abs(res)))


class _HillSystem:
    """``V(x, tau) = c(tau) x**2/2 + omega0**2 q0(tau) x``, c from the sn form."""

    mass = 1.0

    def __init__(self, params: DualParams, consts: PendulumOrbitConstants):
        self.params = params
        self.consts = consts
        self.forcing_scale = params.omega0 ** 2

    def coefficient(self, tau):
        sn, _, _ = jacobi_sncndn(self.consts.Omega * tau + self.consts.phi, self.consts.k)
        return self.params.alpha * (1.0 - 2.0 * sn * sn)

    def force(self, x, tau):
        q0 = leading_order_state(self.params, self.consts, tau)[0]
        return -self.coefficient(tau) * x - self.forcing_scale * q0

    def hessian(self, x, tau):
        return self.coefficient(tau)


@dataclass(frozen=True)
class NLOResult:
    tau: np.ndarray
    q1: np.ndarray
    p1: np.ndarray
    k_squared: float
    modulus_warning: bool
    identity_error: float

    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.tau.tolist(), self.q1.tolist()))


def nlo_solve(params: DualParams, c: PendulumOrbitConstants, tau_end: float,
              cfg: StepperConfig | None = None, sample_every: int = 1) -> NLOResult:
    """Integrate the first-order correction with ``q1(0) = q1'(0) = 0``.

    Uses the fourth-order stepper regardless of ``cfg.order``. The coefficient
    identity ``cos(2 am) = 1 - 2 sn**2`` is checked on the output grid.
    """
    if not tau_end > 0:
        raise DomainError("tau_end must be positive")
    cfg = StepperConfig(cfg.dt if cfg is not None else 1e-3, Order.YOSHIDA4)
    k2 = c.k.k ** 2
    warn = k2 > MODULUS_WARNING_K2
    if warn:
        warnings.warn(f"modulus k^2={k2:.3g} is not small; the NLO correction may be poor",
                      RuntimeWarning, stacklevel=2)
    system = _HillSystem(params, c)
    arr = integrate_array(system, PhaseState(0.0, 0.0, 0.0), tau_end, cfg, sample_every)
    tau = arr[:, 0]

    q0, _ = leading_order_state(params, c, tau)
    via_cos = params.alpha * np.cos(q0 - params.wave_speed * tau)
    via_sn = system.coefficient(tau)
    identity_error = float(np.max(np.abs(via_cos - via_sn)))
    if identity_error > 1e-9:
        raise RuntimeError(f"coefficient identity violated by {identity_error:g}")
    return NLOResult(tau=tau, q1=arr[:, 1], p1=arr[:, 2], k_squared=k2,
                     modulus_warning=warn, identity_error=identity_error)


def _composite_error(params: DualParams, q0: float, p0_dual: float, t_end_dual: float,
                     cfg: StepperConfig, sample_every: int, drop_oscillator: bool) -> float:
    c = constants_from_ic(params, q0, p0_dual)
    full_params = params
    if drop_oscillator:
        # infinite-lambda proxy: bare pendulum in the wave frame
        full_params = replace(params, omega0=0.0)
    full = integrate_array(full_params, PhaseState(q0, p0_dual, 0.0), t_end_dual, cfg, sample_every)
    q_lo, _ = leading_order_state(params, c, full[:, 0])
    if drop_oscillator:
        return float(np.max(np.abs(full[:, 1] - q_lo)))
    nlo = nlo_solve(params, c, t_end_dual, cfg, sample_every)
    if nlo.tau.shape != full[:, 0].shape or not np.allclose(nlo.tau, full[:, 0], rtol=0, atol=1e-12):
        raise RuntimeError("NLO and full grids are misaligned")
    return float(np.max(np.abs(full[:, 1] - (q_lo + nlo.q1 / params.lambda_))))


def composite_accuracy(base: DualParams, lambdas: Sequence[float], q0: float, p0_dual: float,
                       t_end_dual: float, cfg: StepperConfig | None = None,
                       sample_every: int = 10, drop_oscillator: bool = False,
                       workers: int = 1) -> list[tuple[float, float]]:
    """Truncation error of ``q0 + q1/lambda`` against the full dual flow, per lambda.

    ``base`` fixes alpha, omega0 and omega; lambda is replaced from ``lambdas``.
    The same dual initial condition ``(q0, p0_dual)`` is used for every lambda.
    With ``drop_oscillator`` the full system loses its ``1/lambda`` term and the
    leading order alone is compared, which must then be exact.
    """
    cfg = StepperConfig(cfg.dt if cfg is not None else 1e-3, Order.YOSHIDA4)

    def job(lam):
        return _composite_error(replace(base, lambda_=float(lam)), q0, p0_dual, t_end_dual,
                                cfg, sample_every, drop_oscillator)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        errors = list(pool.map(job, lambdas))
    return [(float(lam), err) for lam, err in zip(lambdas, errors)]


def loglog_slope(pairs: Sequence[tuple[float, float]]) -> float:
    """Least-squares slope of log(error) against log(lambda)."""
    x = np.log([lam for lam, _ in pairs])
    y = np.log([err for _, err in pairs])
    return float(np.polyfit(x, y, 1)[0])
