"""Discrete slow dynamics of the burst width.

Sampled at actuation events and with the half period approximated by
``pi / omega_star``, the adaptation filter reduces to the error recursion

    e[k+1] in -g0 + g1 e[k] - g2 sgn(e[k]),   e = beta - beta_star.

The multivalued sign is resolved to ``+1`` at zero throughout, matching the
simulator's tie-break.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .describing_fn import DesignPoint, solve_hb
from .errors import InvalidInputError
from .plant import PlantParams
from .simulator import AdaptiveParams

STABLE = "stable-fixed-point"
BOUNDED = "ultimately-bounded"


@dataclass(frozen=True)
class SlowGains:
    g0: float
    g1: float
    g2: float
    omega_star: float = math.nan
    beta_star: float = math.nan

    @classmethod
    def from_values(cls, g0: float, g1: float, g2: float) -> "SlowGains":
        """Gains given directly, without the physical parameters behind them."""
        if not (g0 >= 0 and 0 < g1 < 1 and g2 >= 0):
            raise InvalidInputError(f"invalid gains g0={g0}, g1={g1}, g2={g2}")
        return cls(g0, g1, g2)


@dataclass(frozen=True)
class SlowVerdict:
    regime: Literal["stable-fixed-point", "ultimately-bounded"]
    fixed_point: float
    ultimate_bound: float | None = None


def _decay_factors(c: float, omega_star: float) -> tuple[float, float]:
    """``(exp(-c pi / omega_star), exp(-c pi / (2 omega_star)))``."""
    x = c * math.pi / omega_star
    return math.exp(-x), math.exp(-0.5 * x)


def gains_from_physical(gamma: float, c: float, beta_star: float, omega_star: float) -> SlowGains:
    if not (c > 0 and omega_star > 0 and beta_star > 0 and gamma >= 0):
        raise InvalidInputError("need c > 0, omega_star > 0, beta_star > 0, gamma >= 0")
    full, half = _decay_factors(c, omega_star)
    g = SlowGains(
        g0=-math.expm1(-c * math.pi / omega_star) * beta_star,
        g1=full,
        g2=gamma * half,
        omega_star=omega_star,
        beta_star=beta_star,
    )
    if g.g2 == 0:
        warnings.warn("gamma = 0 gives g2 = 0: adaptation switched off", RuntimeWarning, stacklevel=2)
    return g


def make_gains(a: AdaptiveParams, design: DesignPoint) -> SlowGains:
    return gains_from_physical(a.gamma, a.c, design.beta_star, design.omega_star)


def _sgn(x: float) -> float:
    return -1.0 if x < 0 else 1.0


def step_error(beta_err: float, g: SlowGains) -> float:
    return -g.g0 + g.g1 * beta_err - g.g2 * _sgn(beta_err)


def fixed_point(g: SlowGains) -> float:
    return min(0.0, (g.g2 - g.g0) / (1.0 - g.g1))


def ultimate_bound(g: SlowGains) -> float:
    return (g.g0 + g.g2) / (1.0 + g.g1)


def classify(g: SlowGains) -> SlowVerdict:
    if g.g0 >= g.g2:
        return SlowVerdict(STABLE, fixed_point(g))
    return SlowVerdict(BOUNDED, fixed_point(g), ultimate_bound(g))


def bifurcation_gamma(c: float, design: DesignPoint) -> float:
    """Adaptation gain at which ``g0 = g2``: ``2 sinh(c pi / (2 omega_star)) beta_star``."""
    if c <= 0:
        raise InvalidInputError("c must be > 0")
    return 2.0 * math.sinh(c * math.pi / (2.0 * design.omega_star)) * design.beta_star


def pole_for_bifurcation(gamma_star: float, design: DesignPoint) -> float:
    """Inverse of :func:`bifurcation_gamma` in ``c``."""
    return 2.0 * design.omega_star / math.pi * math.asinh(gamma_star / (2.0 * design.beta_star))


def iterate_error(e0: float, g: SlowGains, n: int) -> np.ndarray:
    """Orbit ``e[0..n]`` of the error recursion."""
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    out = np.empty(n + 1)
    out[0] = e = float(e0)
    g0, g1, g2 = g.g0, g.g1, g.g2
    for k in range(1, n + 1):
        e = -g0 + g1 * e - (g2 if e >= 0 else -g2)
        out[k] = e
    return out


def iterate(beta0: float, g: SlowGains, n: int) -> np.ndarray:
    """Orbit ``beta[0..n]`` of the burst-width recursion sampled at actuation events."""
    if math.isnan(g.beta_star):
        raise InvalidInputError("iterate needs gains built from a design point")
    return iterate_error(beta0 - g.beta_star, g, n) + g.beta_star


def period_two_orbit(g: SlowGains) -> tuple[float, float] | None:
    """The alternating orbit ``(p > 0, n < 0)`` of the error recursion, if any."""
    p = g.g2 / (1.0 + g.g1) - g.g0 / (1.0 - g.g1)
    n = -g.g2 / (1.0 + g.g1) - g.g0 / (1.0 - g.g1)
    if p >= 0 > n:
        return p, n
    return None


def burst_width_bounds(g: SlowGains) -> tuple[float, float]:
    """Range of ``beta`` the slow model predicts asymptotically.

    Stable regime: the fixed point (a degenerate interval).  Otherwise the
    symmetric ultimate bound around ``beta_star``.
    """
    v = classify(g)
    if v.regime == STABLE:
        b = g.beta_star + v.fixed_point
        return b, b
    return g.beta_star - v.ultimate_bound, g.beta_star + v.ultimate_bound


def predicted_amplitude_error(g: SlowGains, p: PlantParams, a_star: float, samples: int = 33) -> float:
    """``limsup |A(beta_k) - a_star|`` implied by the asymptotic burst-width range.

    The amplitude map is sampled on the predicted range (it is not monotone
    for wide bursts); widths at or below zero produce no actuation and hence
    zero amplitude.
    """
    lo, hi = burst_width_bounds(g)
    widths = np.unique(np.concatenate(([lo, hi], np.linspace(lo, hi, samples))))
    worst = 0.0
    for b in widths:
        amp = solve_hb(float(b), p).amplitude if b > 0 else 0.0
        worst = max(worst, abs(amp - a_star))
    return worst
