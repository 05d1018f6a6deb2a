"""Parameter sweeps behind the command line reports.

Every function here returns plain rows (lists of dicts) in a deterministic
order; the command line layer only formats and writes them.  Independent
runs are dispatched through :func:`parallel_map`, which preserves input order.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Iterable, Sequence

import numpy as np

from . import robust_opt, slow_model
from .describing_fn import DesignPoint, solve_design_point, solve_hb
from .errors import DivergenceError, WindowError
from .plant import PlantParams, PlantState
from .simulator import (
    AdaptiveParams,
    measure_objectives,
    run_closed_loop,
    steady_state,
    tail_variance,
)

# Reference bifurcation gain 0.0075 at beta* = 0.0915; back-solving the
# bifurcation formula for the pole gives c = 0.201.
DEFAULT_C = 0.2
REFERENCE_GAMMA_STAR = 0.0075
REFERENCE_INTERVAL = (0.0732, 0.2288)
CONVERGED = "converged"
OSCILLATING = "oscillating"
DIVERGED = "diverged"


@dataclass(frozen=True)
class SimSettings:
    horizon_periods: float = 200.0
    dt_frac: float = 1e-3
    y0: float = 0.05
    beta0: float = 0.0
    tail_fraction: float = 0.25

    def run(self, p: PlantParams, a: AdaptiveParams, a_star: float, beta0: float | None = None):
        return run_closed_loop(
            p,
            a,
            a_star,
            init=PlantState(self.y0, 0.0),
            beta0=self.beta0 if beta0 is None else beta0,
            horizon_periods=self.horizon_periods,
            dt=self.dt_frac * p.natural_period,
            record_samples=False,
        )


def parallel_map(fn: Callable, items: Iterable, jobs: int = 1) -> list:
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# -- limit cycle vs burst width ------------------------------------------------------------------


def _hb_sweep_point(beta, p, settings):
    row = {"beta": beta, "omega_hb": math.nan, "amp_hb": math.nan, "omega_sim": math.nan, "amp_sim": math.nan}
    try:
        hb = solve_hb(beta, p)
        row["omega_hb"], row["amp_hb"] = hb.omega, hb.amplitude
    except Exception as exc:  # recorded as empty cells
        warnings.warn(f"harmonic balance failed at beta={beta}: {exc}", RuntimeWarning)
    try:
        trace = settings.run(p, AdaptiveParams.frozen(), 1.0, beta0=beta)
        row["amp_sim"], row["omega_sim"] = steady_state(trace, settings.tail_fraction)
    except (DivergenceError, WindowError) as exc:
        warnings.warn(f"simulation failed at beta={beta}: {exc}", RuntimeWarning)
    return row


def hb_sweep(
    p: PlantParams, betas: Sequence[float], settings: SimSettings = SimSettings(horizon_periods=60), jobs: int = 1
) -> list[dict]:
    """Harmonic-balance and simulated (frozen adaptation) limit cycles per burst width."""
    return parallel_map(partial(_hb_sweep_point, p=p, settings=settings), [float(b) for b in betas], jobs)


def hb_sweep_summary(rows: Sequence[dict], beta_min: float = 0.03) -> dict:
    amp = [abs(r["amp_sim"] / r["amp_hb"] - 1) for r in rows if r["beta"] >= beta_min]
    om = [abs(r["omega_sim"] / r["omega_hb"] - 1) for r in rows if r["beta"] >= beta_min]
    return {
        "beta": f"rel_gap(beta>={beta_min})",
        "omega_hb": math.nan,
        "amp_hb": math.nan,
        "omega_sim": max(om) if om else math.nan,
        "amp_sim": max(amp) if amp else math.nan,
    }


# -- error heatmap ------------------------------------------------------------------


def _full_cell(gc, p, a_star, design, settings):
    gamma, c = gc
    try:
        trace = settings.run(p, AdaptiveParams(gamma, c), a_star)
        obj = measure_objectives(trace, a_star, design.omega_star, settings.tail_fraction)
        return obj.ultimate_error
    except (DivergenceError, WindowError):
        return math.nan


def _slow_cell(gc, p, a_star, design):
    gamma, c = gc
    g = slow_model.gains_from_physical(gamma, c, design.beta_star, design.omega_star)
    return slow_model.predicted_amplitude_error(g, p, a_star)


def heatmap(
    p: PlantParams,
    a_star: float,
    gammas: Sequence[float],
    cs: Sequence[float],
    mode: str = "full",
    settings: SimSettings = SimSettings(),
    jobs: int = 1,
    design: DesignPoint | None = None,
) -> list[dict]:
    """Ultimate amplitude error over a ``(gamma, c)`` grid; rows ordered gamma-major."""
    design = design or solve_design_point(a_star, p)
    cells = [(float(g), float(c)) for g in gammas for c in cs]
    if mode == "full":
        fn = partial(_full_cell, p=p, a_star=a_star, design=design, settings=settings)
    elif mode == "slow":
        fn = partial(_slow_cell, p=p, a_star=a_star, design=design)
    else:
        raise ValueError(f"unknown heatmap mode {mode!r}")
    errors = parallel_map(fn, cells, jobs)
    return [{"gamma": g, "c": c, "error": e} for (g, c), e in zip(cells, errors)]


# -- bifurcation ------------------------------------------------------------------


def label_series(values, scale: float, rel_threshold: float = 1e-3, tail_fraction: float = 0.25) -> str:
    """Converged when the tail standard deviation is below ``rel_threshold * scale``."""
    values = np.asarray(values, dtype=float)
    if values.size < 4 or not np.all(np.isfinite(values)):
        return DIVERGED
    return CONVERGED if tail_variance(values, tail_fraction) < (rel_threshold * scale) ** 2 else OSCILLATING


@dataclass
class BifurcationRun:
    gamma: float
    full_t: np.ndarray = field(default_factory=lambda: np.empty(0))
    full_beta: np.ndarray = field(default_factory=lambda: np.empty(0))
    slow_beta: np.ndarray = field(default_factory=lambda: np.empty(0))
    full_label: str = DIVERGED
    slow_label: str = DIVERGED


def _bifurcation_run(gamma, p, a_star, c, design, settings):
    run = BifurcationRun(gamma=gamma)
    g = slow_model.gains_from_physical(gamma, c, design.beta_star, design.omega_star)
    try:
        trace = settings.run(p, AdaptiveParams(gamma, c), a_star)
        run.full_t, run.full_beta = trace.beta_at_actuation()
        run.full_label = label_series(run.full_beta, design.beta_star)
    except DivergenceError:
        pass
    n = max(len(run.full_beta) - 1, int(2 * settings.horizon_periods), 1)
    run.slow_beta = slow_model.iterate(settings.beta0, g, n)
    run.slow_label = label_series(run.slow_beta, design.beta_star)
    return run


def bifurcation(
    p: PlantParams,
    a_star: float,
    gammas: Sequence[float],
    c: float = DEFAULT_C,
    settings: SimSettings = SimSettings(horizon_periods=400),
    jobs: int = 1,
    design: DesignPoint | None = None,
) -> list[BifurcationRun]:
    if not len(gammas):
        raise ValueError("at least one gamma is required")
    design = design or solve_design_point(a_star, p)
    fn = partial(_bifurcation_run, p=p, a_star=a_star, c=c, design=design, settings=settings)
    return parallel_map(fn, [float(g) for g in gammas], jobs)


# -- robust tuning ------------------------------------------------------------------


def worst_case_surface(interval, gammas, cs, omega_star) -> list[dict]:
    return [
        {"gamma": float(g), "c": float(c), "worst_j": robust_opt.worst_case(float(g), interval, float(c), omega_star)[0]}
        for g in gammas
        for c in cs
    ]


def _burst_error_point(beta_star, p, gamma, c, settings):
    """Simulated ultimate burst-width error when the true design width is ``beta_star``.

    The target amplitude is what the simulated loop reaches with the burst
    width frozen at ``beta_star``, so the error isolates the adaptation loop
    from the harmonic-balance approximation.
    """
    frozen = settings.run(p, AdaptiveParams.frozen(), 1.0, beta0=beta_star)
    a_sim, _ = steady_state(frozen, settings.tail_fraction)
    trace = settings.run(p, AdaptiveParams(gamma, c), a_sim, beta0=beta_star)
    tk, bk = trace.beta_at_actuation()
    tail = bk[tk >= tk[-1] - settings.tail_fraction * (tk[-1] - tk[0])]
    return {"beta_star": beta_star, "a_star_sim": a_sim, "error_sim": float(np.max(np.abs(tail - beta_star)))}


def burst_width_errors(
    p: PlantParams,
    betas: Sequence[float],
    gamma: float,
    c: float,
    settings: SimSettings = SimSettings(horizon_periods=300),
    jobs: int = 1,
) -> list[dict]:
    fn = partial(_burst_error_point, p=p, gamma=gamma, c=c, settings=settings)
    return parallel_map(fn, [float(b) for b in betas], jobs)
