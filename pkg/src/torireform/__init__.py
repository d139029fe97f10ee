"""Numerical laboratory for strongly driven Hamiltonian oscillators and tori reforming."""

__version__ = "0.1.0"

from .system import DomainError, DualParams, OscillatorParams, PhaseState  # noqa: E402

__all__ = ["DomainError", "DualParams", "OscillatorParams", "PhaseState", "__version__"]
