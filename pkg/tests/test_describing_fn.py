import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from scipy.integrate import quad

from neurorhythm import plant
from neurorhythm.describing_fn import (
    DesignPoint,
    amplitude_curve,
    default_beta_bracket,
    describing_fn,
    describing_fn_mag,
    describing_fn_phase,
    hb_residual,
    phase_balance,
    solve_design_point,
    solve_hb,
)
from neurorhythm.errors import InvalidInputError, OutOfModelError, UnachievableAmplitudeError


def fourier_first_harmonic(omega, beta):
    """(a1, b1) of the +/- pulse train by adaptive quadrature over one period."""
    period = 2 * math.pi / omega

    def u(t):
        if 0 <= t <= beta:
            return 1.0
        if period / 2 <= t <= period / 2 + beta:
            return -1.0
        return 0.0

    pts = [beta, period / 2, period / 2 + beta]
    kw = dict(points=pts, limit=200, epsabs=1e-13, epsrel=1e-12)
    a1 = 2 / period * quad(lambda t: u(t) * math.cos(omega * t), 0, period, **kw)[0]
    b1 = 2 / period * quad(lambda t: u(t) * math.sin(omega * t), 0, period, **kw)[0]
    return a1, b1


def test_magnitude_vanishes_for_short_bursts():
    assert describing_fn_mag(1.0, 8.0, 1e-12) == pytest.approx(0.0, abs=1e-10)


def test_magnitude_at_half_period_limit():
    omega = 8.0
    beta = math.pi / omega * (1 - 1e-12)
    assert describing_fn_mag(1.0, omega, beta) == pytest.approx(4 / math.pi, rel=1e-9)
    assert describing_fn_phase(omega, beta) == pytest.approx(0.0, abs=1e-9)


def test_phase_short_burst_limit():
    assert describing_fn_phase(8.0, 1e-12) == pytest.approx(math.pi / 2)


def test_reference_values_against_fourier():
    a1, b1 = fourier_first_harmonic(8.0, 0.1)
    assert a1 == pytest.approx(2 / math.pi * math.sin(0.8), rel=1e-10)
    assert b1 == pytest.approx(2 / math.pi * (1 - math.cos(0.8)), rel=1e-10)
    assert describing_fn_mag(2.0, 8.0, 0.1) == pytest.approx(math.hypot(a1, b1) / 2.0, rel=1e-9)
    assert describing_fn_mag(2.0, 8.0, 0.1) == pytest.approx(0.2479, abs=1e-4)
    assert describing_fn_phase(8.0, 0.1) == pytest.approx(math.atan2(a1, b1), rel=1e-9)
    assert describing_fn_phase(8.0, 0.1) == pytest.approx(1.1708, abs=1e-4)


@given(st.floats(0.5, 40.0), st.floats(0.01, 0.99), st.floats(0.1, 5.0))
def test_describing_function_matches_quadrature(omega, frac, amp):
    beta = frac * math.pi / omega
    a1, b1 = fourier_first_harmonic(omega, beta)
    n = describing_fn(amp, omega, beta)
    expected = complex(b1, a1) / amp
    assert abs(n - expected) <= 1e-6 * abs(expected)


@pytest.mark.parametrize("beta", [math.pi / 8, 0.5])
def test_out_of_model_burst(beta):
    with pytest.raises(OutOfModelError):
        describing_fn_mag(1.0, 8.0, beta)
    with pytest.raises(OutOfModelError):
        describing_fn_phase(8.0, beta)


def test_invalid_arguments():
    with pytest.raises(InvalidInputError):
        describing_fn_mag(0.0, 8.0, 0.1)
    with pytest.raises(InvalidInputError):
        solve_hb(-0.1, plant.PlantParams())
    with pytest.raises(InvalidInputError):
        solve_hb(0.1, plant.PlantParams(xi=0.0))


def test_design_amplitude_reference(pendulum):
    # reference design: beta* = 0.0915 gives A* = 0.5
    sol = solve_hb(0.0915, pendulum)
    assert sol.amplitude == pytest.approx(0.5, rel=0.05)


def test_short_burst_gives_small_amplitude(pendulum):
    assert solve_hb(1e-6, pendulum).amplitude < 1e-4


def test_hb_matches_grid_oracle(pendulum):
    beta = 0.1
    omegas = np.arange(7.0, 8.5, 1e-4)
    amps = np.arange(0.40, 0.70, 1e-4)
    p_jw = pendulum.lambda_gain / ((1j * omegas) ** 2 + 2 * pendulum.xi * pendulum.omega_n * 1j * omegas + pendulum.omega_n**2)
    best = (np.inf, None, None)
    for i in range(0, len(omegas), 1000):
        w = omegas[i : i + 1000, None]
        n = 4 / (amps[None, :] * np.pi) * np.sin(w * beta / 2) * np.exp(1j * (np.pi - w * beta) / 2)
        r = np.abs(n * p_jw[i : i + 1000, None] - 1)
        k = np.unravel_index(np.argmin(r), r.shape)
        if r[k] < best[0]:
            best = (r[k], omegas[i + k[0]], amps[k[1]])
    sol = solve_hb(beta, pendulum)
    assert abs(sol.omega - best[1]) <= 2e-4
    assert abs(sol.amplitude - best[2]) <= 2e-4
    assert hb_residual(sol, pendulum) < 1e-8


@given(st.floats(1e-3, 0.35))
def test_solution_invariants(beta):
    p = plant.PlantParams()
    sol = solve_hb(beta, p)
    assert 0 < sol.omega < math.pi / beta
    assert sol.amplitude > 0
    assert hb_residual(sol, p) < 1e-8


@pytest.mark.parametrize("beta", [0.005, 0.05, 0.1, 0.2, 0.3])
def test_phase_balance_single_sign_change(pendulum, beta):
    grid = np.linspace(0, math.pi / beta, 1002)[1:-1]
    signs = np.sign([phase_balance(w, beta, pendulum) for w in grid])
    assert np.count_nonzero(np.diff(signs)) == 1


def test_amplitude_curve(pendulum):
    assert amplitude_curve([], pendulum) == []
    sols = amplitude_curve([0.05, 0.10, 0.15], pendulum)
    assert sols[0].amplitude < sols[1].amplitude < sols[2].amplitude
    assert amplitude_curve([0.1], pendulum) == [solve_hb(0.1, pendulum)]


def test_amplitude_monotone_on_reference_range(pendulum):
    sols = amplitude_curve(np.linspace(0.005, 0.2, 40), pendulum)
    assert all(b.amplitude > a.amplitude for a, b in zip(sols, sols[1:]))


def test_default_bracket_stops_where_amplitude_peaks(pendulum):
    lo, hi = default_beta_bracket(pendulum)
    assert lo == 1e-4
    assert 0.2 < hi < 0.9 * math.pi / 8
    assert solve_hb(hi, pendulum).amplitude > solve_hb(0.9 * math.pi / 8, pendulum).amplitude


def test_design_point_reference(pendulum):
    d = solve_design_point(0.5, pendulum)
    assert d.beta_star == pytest.approx(0.0915, rel=0.05)
    assert d.omega_star == pytest.approx(solve_hb(d.beta_star, pendulum).omega)


def test_design_point_inverts_forward_map(pendulum):
    beta0 = 0.137
    a = solve_hb(beta0, pendulum).amplitude
    assert solve_design_point(a, pendulum).beta_star == pytest.approx(beta0, abs=1e-7)
    d = solve_design_point(0.25, pendulum)
    assert isinstance(d, DesignPoint)
    assert solve_hb(d.beta_star, pendulum).amplitude == pytest.approx(0.25, abs=1e-8)


@given(st.floats(0.01, 0.8))
def test_round_trip(a_star):
    p = plant.PlantParams()
    d = solve_design_point(a_star, p, monotone_samples=0)
    assert abs(solve_hb(d.beta_star, p).amplitude - a_star) <= 2e-8


def test_unachievable_amplitude(pendulum):
    with pytest.raises(UnachievableAmplitudeError):
        solve_design_point(2.0, pendulum)
    with pytest.raises(UnachievableAmplitudeError):
        solve_design_point(0.5, pendulum, beta_bracket=(0.01, 0.05))
