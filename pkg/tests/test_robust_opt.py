import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from neurorhythm.errors import InvalidInputError, UnachievableAmplitudeError, WrongBranchError
from neurorhythm.robust_opt import (
    STABLE_BRANCH,
    UNSTABLE_BRANCH,
    TuningReport,
    UncertaintyInterval,
    beta_interval_from_uncertainty,
    cost,
    cost_stable,
    cost_unstable,
    gamma_balance,
    gamma_lower,
    gamma_opt,
    gamma_upper,
    grid_gamma_opt,
    grid_worst_case,
    stability_threshold,
    tune,
    verify_vertices,
    worst_case,
)
from neurorhythm.slow_model import classify, fixed_point, gains_from_physical, ultimate_bound

W = 7.712229842656225
C = 0.2


def random_instance(rng):
    lo = rng.uniform(0.01, 0.3)
    hi = lo * rng.uniform(1.0, 4.0)
    return UncertaintyInterval(lo, hi), rng.uniform(0.01, 1.0), rng.uniform(2.0, 20.0)


def boundary_gamma(beta, c, w):
    x = c * math.pi / w
    return beta * (1 - math.exp(-x)) / math.exp(-x / 2)


# -- branch costs -------------------------------------------------------------


def test_stable_cost_examples():
    gb = boundary_gamma(0.1, C, W)
    assert cost_stable(gb * (1 - 1e-12), 0.1, C, W) == pytest.approx(0.0, abs=1e-12)
    assert cost_stable(0.0, 0.1, C, W) == 0.1


def test_unstable_cost_examples():
    x = C * math.pi / W
    g1 = math.exp(-x)
    gb = boundary_gamma(0.1, C, W)
    g0 = (1 - g1) * 0.1
    # the branches do not meet at the boundary
    gap = cost_unstable(gb * (1 + 1e-12), 0.1, C, W) - cost_stable(gb * (1 - 1e-12), 0.1, C, W)
    assert gap == pytest.approx(2 * g0 / (1 + g1), rel=1e-9)
    assert gap > 0
    assert cost_unstable(0.01, 1e-15, C, W) == pytest.approx(0.01 * math.exp(-x / 2) / (1 + g1), rel=1e-9)


def test_wrong_branch():
    with pytest.raises(WrongBranchError):
        cost_stable(1.0, 0.1, C, W)
    with pytest.raises(WrongBranchError):
        cost_unstable(0.0, 0.1, C, W)
    with pytest.raises(InvalidInputError):
        cost(-1.0, 0.1, C, W)


@given(st.floats(0.0, 0.5), st.floats(1e-3, 0.5), st.floats(0.01, 2.0), st.floats(1.0, 30.0))
def test_costs_match_slow_model(gamma, beta, c, w):
    ev = cost(gamma, beta, c, w)
    with pytest.warns(RuntimeWarning) if gamma == 0 else _null():
        g = gains_from_physical(gamma, c, beta, w)
    if ev.branch == STABLE_BRANCH:
        assert abs(ev.value - abs(fixed_point(g))) <= 1e-12
    else:
        assert ev.branch == UNSTABLE_BRANCH
        assert classify(g).regime != "stable-fixed-point"
        assert abs(ev.value - ultimate_bound(g)) <= 1e-12


class _null:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


def test_branch_tag_matches_threshold():
    t = stability_threshold(0.01, C, W)
    assert cost(0.01, t * 1.001, C, W).branch == STABLE_BRANCH
    assert cost(0.01, t * 0.999, C, W).branch == UNSTABLE_BRANCH


def test_branch_monotonicity_in_gamma():
    rng = np.random.default_rng(0)
    for _ in range(50):
        iv, c, w = random_instance(rng)
        gb = boundary_gamma(iv.beta_high, c, w)
        js = [cost_stable(g, iv.beta_high, c, w) for g in np.linspace(0, gb * (1 - 1e-9), 200)]
        ju = [cost_unstable(g, iv.beta_high, c, w) for g in np.linspace(gb * 1.001, 10 * gb, 200)]
        assert np.all(np.diff(js) < 0)
        assert np.all(np.diff(ju) > 0)


# -- worst case ---------------------------------------------------------------


def test_worst_case_small_gain():
    iv = UncertaintyInterval(0.0732, 0.2288)
    value, arg = worst_case(1e-12, iv, C, W)
    assert value == pytest.approx(0.2288, abs=1e-9) and arg == 0.2288


def test_worst_case_huge_gain():
    iv = UncertaintyInterval(0.0732, 0.2288)
    value, arg = worst_case(100.0, iv, C, W)
    assert arg == 0.2288
    assert value == cost_unstable(100.0, 0.2288, C, W)


def test_worst_case_matches_grid():
    rng = np.random.default_rng(1)
    for _ in range(60):
        iv, c, w = random_instance(rng)
        gamma = rng.uniform(0.2, 1.5) * gamma_upper(iv, c, w)
        value, _ = worst_case(gamma, iv, c, w)
        grid, _ = grid_worst_case(gamma, iv, c, w, n=10_000)
        step = (iv.beta_high - iv.beta_low) / 9_999
        assert grid <= value + 1e-15
        assert value - grid <= step + 1e-15


def test_stable_case_worst_at_upper_end():
    rng = np.random.default_rng(2)
    for _ in range(30):
        iv, c, w = random_instance(rng)
        gamma = 0.9 * gamma_lower(iv, c, w)
        assert stability_threshold(gamma, c, w) <= iv.beta_low
        _, arg = grid_worst_case(gamma, iv, c, w, n=2000)
        assert arg == iv.beta_high


# -- optimum ------------------------------------------------------------------


def test_degenerate_interval_uses_lower_gain():
    iv = UncertaintyInterval(0.0915, 0.0915)
    assert gamma_lower(iv, C, W) > gamma_balance(iv, C, W)
    assert gamma_opt(iv, C, W) == gamma_lower(iv, C, W)
    g, _ = grid_gamma_opt(iv, C, W, np.geomspace(gamma_lower(iv, C, W), gamma_upper(iv, C, W) * 1.5, 1000), 10)
    assert g == pytest.approx(gamma_opt(iv, C, W), rel=1e-12)


def test_small_lower_bound_uses_balance_gain():
    iv = UncertaintyInterval(1e-6, 0.2)
    assert gamma_balance(iv, C, W) > gamma_lower(iv, C, W)
    assert gamma_opt(iv, C, W) == gamma_balance(iv, C, W)


def test_balance_gain_equalizes_branches():
    iv = UncertaintyInterval(0.0732, 0.2288)
    g = gamma_balance(iv, C, W)
    t = stability_threshold(g, C, W)
    ju = (1 - math.exp(-C * math.pi / W)) * t + g * math.exp(-C * math.pi / (2 * W))
    ju /= 1 + math.exp(-C * math.pi / W)
    assert ju == pytest.approx(cost_stable(g, iv.beta_high, C, W), rel=1e-12)


def test_gamma_opt_against_minmax_grid():
    rng = np.random.default_rng(3)
    for _ in range(30):
        iv, c, w = random_instance(rng)
        lo, hi = gamma_lower(iv, c, w), gamma_upper(iv, c, w)
        gammas = np.geomspace(lo, hi, 1000)
        g_grid, j_grid = grid_gamma_opt(iv, c, w, gammas)
        g = gamma_opt(iv, c, w)
        assert g <= hi * (1 + 1e-12)
        assert abs(math.log(g / g_grid)) <= math.log(gammas[1] / gammas[0]) + 1e-12
        assert worst_case(g, iv, c, w)[0] == pytest.approx(j_grid, rel=0.01)


def test_reference_interval_optimum():
    iv = UncertaintyInterval(0.0732, 0.2288)
    g = gamma_opt(iv, C, W)
    gammas = np.geomspace(gamma_lower(iv, C, W), gamma_upper(iv, C, W), 1000)
    g_grid, _ = grid_gamma_opt(iv, C, W, gammas)
    assert abs(math.log(g / g_grid)) <= math.log(gammas[1] / gammas[0]) + 1e-12


def test_invalid_interval():
    with pytest.raises(InvalidInputError):
        UncertaintyInterval(0.2, 0.1)
    with pytest.raises(InvalidInputError):
        UncertaintyInterval(0.0, 0.1)


# -- tuning -------------------------------------------------------------------


def test_tune_without_uncertainty(pendulum, design):
    r = tune(0.5, pendulum, C)
    assert r.beta_low == r.beta_high == design.beta_star
    iv = UncertaintyInterval(design.beta_star, design.beta_star)
    assert r.gamma_opt == gamma_lower(iv, C, design.omega_star)
    assert r.vertices == []


def test_tune_direct_interval(pendulum, design):
    iv = UncertaintyInterval(0.0732, 0.2288)
    r = tune(0.5, pendulum, C, beta_interval=iv)
    assert r.gamma_opt == gamma_opt(iv, C, design.omega_star)
    assert r.predicted_j == worst_case(r.gamma_opt, iv, C, design.omega_star)[0]


def test_tune_with_gain_uncertainty(pendulum):
    r = tune(0.5, pendulum, C, uncertainty={"lambda_gain": 0.1})
    assert len(r.vertices) == 2
    assert verify_vertices(r, 0.5, tol=1e-6)
    lambdas = sorted(v["lambda_gain"] for v in r.vertices)
    assert lambdas == pytest.approx([13.5, 16.5])
    # more gain needs shorter bursts
    assert r.beta_low < r.beta_star < r.beta_high


def test_vertex_enumeration_full_box(pendulum):
    iv, vertices = beta_interval_from_uncertainty(0.5, pendulum, {"lambda_gain": 0.1, "xi": 0.1, "omega_n": 0.05},
                                                  interior_samples=20)
    assert len(vertices) == 8
    assert iv.beta_low == min(v["beta_star"] for v in vertices)


def test_tune_errors(pendulum):
    with pytest.raises(InvalidInputError):
        tune(0.5, pendulum, C, uncertainty={"mass": 0.1})
    with pytest.raises(InvalidInputError):
        tune(0.5, pendulum, C, uncertainty={"xi": 1.5})
    with pytest.raises(UnachievableAmplitudeError):
        tune(5.0, pendulum, C)


def test_report_serialization(pendulum):
    r = tune(0.5, pendulum, C)
    lines = r.to_csv().splitlines()
    assert lines[0].split(",") == list(TuningReport.FIELDS)
    assert float(lines[1].split(",")[6]) == r.gamma_opt
    assert "gamma_opt" in r.summary()
