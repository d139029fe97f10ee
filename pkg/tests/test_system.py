import math

import pytest
from hypothesis import given, strategies as st

from torireform.system import (DomainError, DualParams, OscillatorParams, PhaseState, force,
                               hamiltonian, hessian, potential)

finite = st.floats(-50, 50, allow_nan=False)


def test_potential_values():
    assert potential(OscillatorParams(1, 2, 0.5), 0.0, 0.0) == pytest.approx(-0.5, abs=1e-15)
    assert potential(OscillatorParams(1, 2, 0.0), 2.0, 1.3) == pytest.approx(2.0, abs=1e-15)
    dual = DualParams(alpha=1.0, omega0=1.0, omega=2.0, lambda_=4.0)
    assert potential(dual, math.pi, 0.0) == pytest.approx(1 + math.pi ** 2 / 8, abs=1e-14)


def test_force_and_hessian_values():
    assert force(OscillatorParams(1, 2, 3.0), 0.0, 0.0) == 0.0
    assert force(OscillatorParams(1, 2, 0.0), 1.0, 0.4) == pytest.approx(-1.0)
    assert hessian(OscillatorParams(1, 2, 0.5), 0.0, 0.0) == pytest.approx(1.5)
    assert hessian(OscillatorParams(1, 2, 0.0), 0.3, 9.0) == pytest.approx(1.0)


def test_force_matches_finite_difference():
    prm = OscillatorParams(1.0, 2.0, 10.0)
    h = 1e-6
    fd = -(potential(prm, 0.3 + h, 0.7) - potential(prm, 0.3 - h, 0.7)) / (2 * h)
    assert abs(fd - force(prm, 0.3, 0.7)) < 1e-6


def test_hessian_matches_finite_difference():
    prm = OscillatorParams(1.0, 2.0, 10.0)
    h = 1e-6
    fd = -(force(prm, 1.1 + h, 0.2) - force(prm, 1.1 - h, 0.2)) / (2 * h)
    assert abs(fd - hessian(prm, 1.1, 0.2)) < 1e-5


@given(q=finite, t=finite, eps=st.floats(0, 500))
def test_force_is_minus_gradient(q, t, eps):
    prm = OscillatorParams(1.3, 2.0, eps)
    h = 1e-5
    fd = -(potential(prm, q + h, t) - potential(prm, q - h, t)) / (2 * h)
    scale = 1 + abs(q) * 1.69 + eps
    assert abs(fd - force(prm, q, t)) < 1e-6 * scale


def test_dual_at_unit_lambda_is_original():
    orig = OscillatorParams(1.0, 2.0, 10.0)
    dual = DualParams(alpha=10.0, omega0=1.0, omega=2.0, lambda_=1.0)
    assert dual.coefficients == orig.coefficients
    assert dual.epsilon == 10.0
    assert dual.original() == orig


def test_hamiltonian_kinetic_term():
    prm = OscillatorParams(0.0, 2.0, 0.0)
    assert hamiltonian(prm, PhaseState(4.0, 3.0, 1.0)) == pytest.approx(4.5)


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_phase_state_rejects_non_finite(bad):
    with pytest.raises(DomainError):
        PhaseState(bad, 0.0)
    with pytest.raises(DomainError):
        PhaseState(0.0, 0.0, bad)


@pytest.mark.parametrize("kwargs", [
    dict(omega0=1, omega=0, epsilon=1),
    dict(omega0=1, omega=2, epsilon=-1),
    dict(omega0=-1, omega=2, epsilon=1),
    dict(omega0=1, omega=2, epsilon=1, mass=0),
])
def test_oscillator_params_validation(kwargs):
    with pytest.raises(DomainError):
        OscillatorParams(**kwargs)


def test_dual_params_need_positive_fields():
    with pytest.raises(DomainError):
        DualParams(alpha=0.0, omega0=1, omega=2, lambda_=4)
    with pytest.raises(DomainError):
        DualParams(alpha=1.0, omega0=1, omega=2, lambda_=0)
