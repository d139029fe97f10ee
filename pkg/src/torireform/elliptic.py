"""Complete elliptic integral K and Jacobi elliptic functions for real arguments.

Every public function takes the modulus ``k`` (not the parameter ``m = k**2``)
and is restricted to ``0 <= k < 1``. Functions broadcast over numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .system import DomainError

# descending-modulus threshold for the Landen/AGM ladder
_LANDEN_TOL = 1e-14
_MAX_LADDER = 40


@dataclass(frozen=True)
class EllipticModulus:
    k: float

    def __post_init__(self):
        if not (math.isfinite(self.k) and 0.0 <= self.k < 1.0):
            raise DomainError(f"elliptic modulus must satisfy 0 <= k < 1, got {self.k!r}")

    @property
    def complementary(self) -> float:
        return math.sqrt((1.0 - self.k) * (1.0 + self.k))


def _modulus(k) -> EllipticModulus:
    return k if isinstance(k, EllipticModulus) else EllipticModulus(float(k))


def complete_K(k) -> float:
    """K(k) by the arithmetic-geometric mean, ``pi / (2 AGM(1, k'))``."""
    mod = _modulus(k)
    a, b = 1.0, mod.complementary
    for _ in range(_MAX_LADDER):
        if abs(a - b) <= 4e-16 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (2.0 * a)


def _ladder(k: float):
    # AGM ladder (a_n, c_n) of the descending Landen transformation
    a, b, c = 1.0, math.sqrt((1.0 - k) * (1.0 + k)), k
    a_list, c_list = [a], [c]
    while abs(c) >= _LANDEN_TOL:
        if len(a_list) > _MAX_LADDER:  # pragma: no cover - AGM converges quadratically
            raise RuntimeError(f"Landen ladder did not converge for k={k}")
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        a_list.append(a)
        c_list.append(c)
    return a_list, c_list


def _landen_amplitude(u, k: float):
    """Amplitude angle from the descending ladder; continuous in u."""
    a_list, c_list = _ladder(k)
    n = len(a_list) - 1
    phi = (2.0 ** n) * a_list[n] * u
    for j in range(n, 0, -1):
        phi = 0.5 * (phi + np.arcsin(c_list[j] / a_list[j] * np.sin(phi)))
    return phi


def jacobi_sncndn(u, k):
    """Return ``(sn, cn, dn)`` of ``u`` at modulus ``k``.

    ``dn`` is formed as ``sqrt(1 - k**2 sn**2)``, which is positive on the whole
    rotation range ``k < 1`` and avoids the 0/0 of the ratio formula at cn = 0.
    """
    mod = _modulus(k)
    u = np.asarray(u, dtype=float)
    phi = _landen_amplitude(u, mod.k)
    sn = np.sin(phi)
    cn = np.cos(phi)
    dn = np.sqrt(1.0 - mod.k * mod.k * sn * sn)
    if u.ndim == 0:
        return float(sn), float(cn), float(dn)
    return sn, cn, dn


def jacobi_am_unwrapped(u, k):
    """Continuous Jacobi amplitude, ``am(0) = 0`` and ``am(u + 2K) = am(u) + pi``.

    The argument is reduced to ``r = u - 2K n`` with ``n = floor(u / 2K)``; on that
    cell the ladder angle lies in ``[0, pi)`` and is used as is, never folded
    back to a principal value.
    """
    mod = _modulus(k)
    u = np.asarray(u, dtype=float)
    two_k = 2.0 * complete_K(mod)
    n = np.floor(u / two_k)
    r = u - two_k * n
    am = _landen_amplitude(r, mod.k) + math.pi * n
    if u.ndim == 0:
        return float(am)
    return am


def jacobi_dn(u, k):
    return jacobi_sncndn(u, k)[2]


def am_inverse(phi: float, k, tol: float = 1e-12) -> float:
    """Solve ``am(x, k) = phi`` for x by bisection on one half-period cell.

    The unwrapped amplitude is strictly increasing, so each cell
    ``[2K n, 2K (n+1)]`` (amplitudes ``[n pi, (n+1) pi]``) holds a unique root.
    """
    mod = _modulus(k)
    if not math.isfinite(phi):
        raise DomainError(f"amplitude must be finite, got {phi!r}")
    two_k = 2.0 * complete_K(mod)
    n = math.floor(phi / math.pi)
    target = phi - n * math.pi
    lo, hi = 0.0, two_k
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if jacobi_am_unwrapped(mid, mod) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi) + n * two_k


def _landen_deviation(r, k: float):
    """``phi(r) - a_N r`` carried through the ladder without forming ``phi``.

    ``a_N`` is the AGM mean, i.e. ``pi / (2K)``. Each backtracking step adds an
    arcsin term of size ``c_j / a_j``, so the result has absolute error of order
    ``k`` ulps instead of ``|phi|`` ulps.
    """
    a_list, c_list = _ladder(k)
    n = len(a_list) - 1
    base = a_list[n] * r
    delta = np.zeros_like(r)
    for j in range(n, 0, -1):
        phi_j = (2.0 ** j) * base + delta
        delta = 0.5 * (delta + np.arcsin(c_list[j] / a_list[j] * np.sin(phi_j)))
    return delta


def jacobi_am_periodic(u, k):
    """Bounded part of the amplitude: ``am(u) - pi u / (2K)``.

    Evaluated on the reduced argument and without cancellation, so second
    differences of it stay accurate where ``am`` itself is large.
    """
    mod = _modulus(k)
    u = np.asarray(u, dtype=float)
    two_k = 2.0 * complete_K(mod)
    r = u - two_k * np.floor(u / two_k)
    per = _landen_deviation(r, mod.k)
    if u.ndim == 0:
        return float(per)
    return per
