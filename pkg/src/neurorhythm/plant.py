"""Controlled pendulum and the frequency response of its linearization."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidInputError, PoleOnAxisError


def _check_finite(**values):
    for name, v in values.items():
        if not math.isfinite(v):
            raise InvalidInputError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class PlantParams:
    """Pendulum ``y'' + 2 xi omega_n y' + omega_n^2 sin(y) = lambda_gain u``."""

    lambda_gain: float = 15.0
    xi: float = 0.1
    omega_n: float = 8.0

    def __post_init__(self):
        _check_finite(lambda_gain=self.lambda_gain, xi=self.xi, omega_n=self.omega_n)
        if self.lambda_gain <= 0:
            raise InvalidInputError("lambda_gain must be > 0")
        if self.omega_n <= 0:
            raise InvalidInputError("omega_n must be > 0")
        if not 0.0 <= self.xi <= 1.0:
            raise InvalidInputError("xi must lie in [0, 1]")

    @property
    def natural_period(self) -> float:
        return 2.0 * math.pi / self.omega_n


@dataclass(frozen=True)
class PlantState:
    y: float
    ydot: float

    def __post_init__(self):
        _check_finite(y=self.y, ydot=self.ydot)


def vector_field(state: PlantState, u: float, p: PlantParams) -> PlantState:
    """Time derivative of ``(y, ydot)`` under control ``u``."""
    _check_finite(u=u)
    yddot = -2.0 * p.xi * p.omega_n * state.ydot - p.omega_n**2 * math.sin(state.y) + p.lambda_gain * u
    return PlantState(state.ydot, yddot)


def _denominator(omega: float, p: PlantParams) -> complex:
    return complex(p.omega_n**2 - omega**2, 2.0 * p.xi * p.omega_n * omega)


def _check_omega(omega: float, p: PlantParams):
    _check_finite(omega=omega)
    if omega < 0:
        raise InvalidInputError("omega must be >= 0")
    if p.xi == 0.0 and omega == p.omega_n:
        raise PoleOnAxisError("undamped plant evaluated at its resonance pole")


def freq_response(omega: float, p: PlantParams) -> complex:
    """``P(j omega) = lambda / ((j omega)^2 + 2 xi omega_n j omega + omega_n^2)``."""
    _check_omega(omega, p)
    return p.lambda_gain / _denominator(omega, p)


def magnitude(omega: float, p: PlantParams) -> float:
    _check_omega(omega, p)
    return p.lambda_gain / abs(_denominator(omega, p))


def phase(omega: float, p: PlantParams) -> float:
    """Continuous phase of ``P(j omega)`` in ``(-pi, 0]``.

    Taken as minus the argument of the denominator, whose imaginary part is
    non-negative for ``omega >= 0``; this keeps a single branch.
    """
    _check_omega(omega, p)
    d = _denominator(omega, p)
    return -math.atan2(d.imag, d.real)


def phase_lag(omega: float, p: PlantParams) -> float:
    """``-phase(omega)``, increasing from 0 to pi."""
    return -phase(omega, p)


__all__ = [
    "PlantParams",
    "PlantState",
    "vector_field",
    "freq_response",
    "magnitude",
    "phase",
    "phase_lag",
]
