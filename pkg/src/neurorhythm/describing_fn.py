"""Describing function of the burst controller and harmonic-balance solves.

For a sinusoidal input of frequency ``omega`` the controller fires a pulse of
width ``beta`` at every zero crossing, signed by the slope.  Its first
harmonic gives the describing function ``N_beta(A, omega)``, whose magnitude
and phase have closed forms valid while ``omega * beta < pi``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import bisect

from . import plant
from .errors import (
    BracketError,
    InvalidInputError,
    NonMonotoneError,
    OutOfModelError,
    UnachievableAmplitudeError,
)
from .plant import PlantParams

PHASE_TOL = 1e-10
AMPLITUDE_TOL = 1e-8
HB_RESIDUAL_TOL = 1e-6


@dataclass(frozen=True)
class HBSolution:
    beta: float
    omega: float
    amplitude: float

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega


@dataclass(frozen=True)
class DesignPoint:
    a_star: float
    beta_star: float
    omega_star: float


def _check_domain(omega, beta, amplitude=1.0):
    for name, v in (("omega", omega), ("beta", beta), ("A", amplitude)):
        if not math.isfinite(v) or v <= 0:
            raise InvalidInputError(f"{name} must be finite and > 0, got {v!r}")
    if omega * beta >= math.pi:
        raise OutOfModelError(
            f"burst width {beta} is not shorter than half the period pi/omega = {math.pi / omega}"
        )


def describing_fn_mag(A: float, omega: float, beta: float) -> float:
    """``|N_beta(A, omega)| = 4 sin(omega beta / 2) / (A pi)``."""
    _check_domain(omega, beta, A)
    return 4.0 / (A * math.pi) * math.sin(0.5 * omega * beta)


def describing_fn_phase(omega: float, beta: float) -> float:
    """``angle N_beta = (pi - omega beta) / 2``; independent of amplitude."""
    _check_domain(omega, beta)
    return 0.5 * (math.pi - omega * beta)


def describing_fn(A: float, omega: float, beta: float) -> complex:
    return cmath.rect(describing_fn_mag(A, omega, beta), describing_fn_phase(omega, beta))


def hb_residual(sol: HBSolution, p: PlantParams) -> float:
    """``|N_beta(A, omega) P(j omega) - 1|`` at a candidate solution."""
    n = describing_fn(sol.amplitude, sol.omega, sol.beta)
    return abs(n * plant.freq_response(sol.omega, p) - 1.0)


def phase_balance(omega: float, beta: float, p: PlantParams) -> float:
    """``angle N + angle P``; zero exactly at the harmonic-balance frequency."""
    return describing_fn_phase(omega, beta) + plant.phase(omega, p)


def hb_amplitude(omega: float, beta: float, p: PlantParams) -> float:
    """Amplitude balancing the gains at a given frequency."""
    return 4.0 / math.pi * plant.magnitude(omega, p) * math.sin(0.5 * omega * beta)


def solve_hb(beta: float, p: PlantParams, tol: float = PHASE_TOL) -> HBSolution:
    """Unique limit-cycle frequency and amplitude predicted for burst width ``beta``.

    The phase balance is strictly decreasing in ``omega`` on ``(0, pi/beta)``,
    positive at the left end and negative at the right, so bisection always
    brackets the root.
    """
    if not math.isfinite(beta) or beta <= 0:
        raise InvalidInputError(f"beta must be finite and > 0, got {beta!r}")
    if p.xi <= 0:
        raise InvalidInputError("harmonic balance requires a damped plant (xi > 0)")
    hi = math.pi / beta
    # Closed-form limits of the phase balance at the open interval ends.
    f_lo = 0.5 * math.pi
    f_hi = -plant.phase_lag(hi, p)
    if not (f_lo > 0 > f_hi):
        raise BracketError(f"phase balance not bracketed on (0, pi/beta) for beta={beta}")
    lo_w = hi * 1e-12
    hi_w = hi * (1.0 - 1e-15)

    def residual(w):
        return 0.5 * (math.pi - w * beta) + plant.phase(w, p)

    if residual(lo_w) <= 0 or residual(hi_w) >= 0:
        raise BracketError(f"phase balance lost its sign change for beta={beta}")
    xtol = tol * 1e-2 * max(1.0, p.omega_n)
    omega = bisect(residual, lo_w, hi_w, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=500)
    if abs(residual(omega)) > tol:
        raise BracketError(f"phase residual {residual(omega):.3e} above tolerance for beta={beta}")
    sol = HBSolution(beta=beta, omega=omega, amplitude=hb_amplitude(omega, beta, p))
    res = hb_residual(sol, p)
    if res > HB_RESIDUAL_TOL:
        raise BracketError(f"harmonic-balance residual {res:.3e} for beta={beta}")
    return sol


def amplitude_curve(
    beta_grid: Sequence[float], p: PlantParams, check_monotone: bool = True
) -> list[HBSolution]:
    """Pointwise harmonic-balance solutions over a grid of burst widths."""
    out = []
    for beta in beta_grid:
        try:
            out.append(solve_hb(float(beta), p))
        except (InvalidInputError, BracketError) as exc:
            raise type(exc)(f"beta={beta}: {exc}") from exc
    if check_monotone:
        order = sorted(out, key=lambda s: s.beta)
        for a, b in zip(order, order[1:]):
            if b.beta > a.beta and not b.amplitude > a.amplitude:
                raise NonMonotoneError(
                    f"amplitude not increasing between beta={a.beta} and beta={b.beta}"
                )
    return out


def default_beta_bracket(p: PlantParams, samples: int = 64) -> tuple[float, float]:
    """``[1e-4, 0.9 pi / omega_n]`` cut back to its leading increasing segment.

    The amplitude map rises and then falls on the full interval (for the
    reference pendulum it peaks near ``beta = 0.24``), so the inverse solve is
    restricted to the part where it is monotone.
    """
    lo, hi = 1e-4, 0.9 * math.pi / p.omega_n
    grid = np.linspace(lo, hi, samples)
    amps = [solve_hb(float(b), p).amplitude for b in grid]
    for i in range(1, samples):
        if not amps[i] > amps[i - 1]:
            # the maximum lies somewhere in (grid[i - 2], grid[i])
            if i < 3:
                raise NonMonotoneError(f"amplitude not increasing from beta={lo}")
            return lo, float(grid[i - 2])
    return lo, hi


def solve_design_point(
    a_star: float,
    p: PlantParams,
    beta_bracket: tuple[float, float] | None = None,
    tol: float = AMPLITUDE_TOL,
    monotone_samples: int = 64,
) -> DesignPoint:
    """Burst width whose predicted limit cycle has amplitude ``a_star``.

    Bisection on ``beta -> A(beta)``.  Monotonicity of that map is checked on
    ``monotone_samples`` points of the bracket before solving.
    """
    if not math.isfinite(a_star) or a_star <= 0:
        raise InvalidInputError(f"a_star must be finite and > 0, got {a_star!r}")
    lo, hi = beta_bracket if beta_bracket is not None else default_beta_bracket(p)
    if not 0 < lo < hi:
        raise InvalidInputError(f"invalid beta bracket ({lo}, {hi})")

    if monotone_samples:
        amplitude_curve(np.linspace(lo, hi, monotone_samples), p, check_monotone=True)

    a_lo = solve_hb(lo, p).amplitude
    a_hi = solve_hb(hi, p).amplitude
    if not a_lo <= a_star <= a_hi:
        raise UnachievableAmplitudeError(
            f"A*={a_star} outside achievable range [{a_lo:.6g}, {a_hi:.6g}] on beta in [{lo}, {hi}]"
        )

    def gap(beta):
        return solve_hb(beta, p).amplitude - a_star

    if gap(lo) == 0:
        beta_star = lo
    elif gap(hi) == 0:
        beta_star = hi
    else:
        # beta tolerance mapped from the amplitude tolerance through the slope of A(beta)
        slope = (a_hi - a_lo) / (hi - lo)
        beta_star = bisect(gap, lo, hi, xtol=tol / max(slope, 1.0) * 1e-2, maxiter=500)
    sol = solve_hb(beta_star, p)
    if abs(sol.amplitude - a_star) > tol:
        raise BracketError(f"inverse solve missed A*={a_star} by {abs(sol.amplitude - a_star):.3e}")
    return DesignPoint(a_star=a_star, beta_star=beta_star, omega_star=sol.omega)
