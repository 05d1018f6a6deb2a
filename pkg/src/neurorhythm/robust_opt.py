"""Robust tuning of the adaptation gain against an uncertain target burst width.

For a fixed pole ``c`` the asymptotic burst-width error is ``J_s`` while the
slow fixed point is stable and the ultimate bound ``J_u`` beyond the
bifurcation.  The gain is chosen to minimise the worst case of ``J`` over an
interval ``[beta_low, beta_high]`` of possible targets.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .describing_fn import DesignPoint, solve_design_point, solve_hb
from .errors import InvalidInputError, WrongBranchError
from .plant import PlantParams

STABLE_BRANCH = "stable"
UNSTABLE_BRANCH = "unstable"


@dataclass(frozen=True)
class UncertaintyInterval:
    beta_low: float
    beta_high: float

    def __post_init__(self):
        if not (0 < self.beta_low <= self.beta_high and math.isfinite(self.beta_high)):
            raise InvalidInputError(f"need 0 < beta_low <= beta_high, got {self.beta_low}, {self.beta_high}")


@dataclass(frozen=True)
class CostEvaluation:
    gamma: float
    beta_star: float
    c: float
    value: float
    branch: str


def _factors(c, omega_star):
    if not (c > 0 and omega_star > 0):
        raise InvalidInputError("c and omega_star must be > 0")
    x = c * math.pi / omega_star
    return -math.expm1(-x), math.exp(-x), math.exp(-0.5 * x)  # 1 - g1, g1, exp(-x/2)


def stability_threshold(gamma: float, c: float, omega_star: float) -> float:
    """Smallest target width for which the slow fixed point is stable at this gain."""
    one_minus_g1, _, half = _factors(c, omega_star)
    return gamma * half / one_minus_g1


def cost_stable(gamma: float, beta_star: float, c: float, omega_star: float) -> float:
    """Steady-state burst-width error ``beta_star - gamma e^{-x/2} / (1 - e^{-x})``, ``x = c pi / omega_star``."""
    if beta_star < stability_threshold(gamma, c, omega_star):
        raise WrongBranchError("stable-branch cost requested beyond the bifurcation")
    one_minus_g1, _, half = _factors(c, omega_star)
    return beta_star - gamma * half / one_minus_g1


def cost_unstable(gamma: float, beta_star: float, c: float, omega_star: float) -> float:
    """Ultimate bound ``(g0 + g2) / (1 + g1)`` past the bifurcation."""
    if beta_star >= stability_threshold(gamma, c, omega_star):
        raise WrongBranchError("unstable-branch cost requested while the fixed point is stable")
    return _cost_unstable(gamma, beta_star, c, omega_star)


def _cost_unstable(gamma, beta_star, c, omega_star):
    one_minus_g1, g1, half = _factors(c, omega_star)
    return (one_minus_g1 * beta_star + gamma * half) / (1.0 + g1)


def cost(gamma: float, beta_star: float, c: float, omega_star: float) -> CostEvaluation:
    if not (gamma >= 0 and beta_star > 0):
        raise InvalidInputError("gamma must be >= 0 and beta_star > 0")
    if beta_star >= stability_threshold(gamma, c, omega_star):
        return CostEvaluation(gamma, beta_star, c, cost_stable(gamma, beta_star, c, omega_star), STABLE_BRANCH)
    return CostEvaluation(gamma, beta_star, c, cost_unstable(gamma, beta_star, c, omega_star), UNSTABLE_BRANCH)


def worst_case(
    gamma: float, interval: UncertaintyInterval, c: float, omega_star: float
) -> tuple[float, float]:
    """``sup J`` over the interval of targets and the target reaching it.

    In the mixed case the supremum of the unstable branch sits at the open
    end ``beta_star -> threshold``; the threshold itself is returned.
    """
    lo, hi = interval.beta_low, interval.beta_high
    t = stability_threshold(gamma, c, omega_star)
    if hi < t:
        return cost_unstable(gamma, hi, c, omega_star), hi
    j_s = cost_stable(gamma, hi, c, omega_star)
    if t <= lo:
        return j_s, hi
    j_u = _cost_unstable(gamma, t, c, omega_star)
    return (j_u, t) if j_u > j_s else (j_s, hi)


def gamma_lower(interval: UncertaintyInterval, c: float, omega_star: float) -> float:
    one_minus_g1, _, half = _factors(c, omega_star)
    return interval.beta_low * one_minus_g1 / half


def gamma_upper(interval: UncertaintyInterval, c: float, omega_star: float) -> float:
    one_minus_g1, _, half = _factors(c, omega_star)
    return interval.beta_high * one_minus_g1 / half


def gamma_balance(interval: UncertaintyInterval, c: float, omega_star: float) -> float:
    """Gain at which ``J_u`` at the threshold equals ``J_s`` at ``beta_high``."""
    x = c * math.pi / omega_star
    return interval.beta_high * -math.expm1(-2 * x) / (3 * math.exp(-0.5 * x) - math.exp(-1.5 * x))


def gamma_opt(interval: UncertaintyInterval, c: float, omega_star: float) -> float:
    return max(gamma_balance(interval, c, omega_star), gamma_lower(interval, c, omega_star))


def grid_worst_case(
    gamma: float, interval: UncertaintyInterval, c: float, omega_star: float, n: int = 10_000
) -> tuple[float, float]:
    """Brute-force ``max J`` over an ``n``-point grid of targets."""
    betas = np.linspace(interval.beta_low, interval.beta_high, n)
    values = [cost(gamma, float(b), c, omega_star).value for b in betas]
    i = int(np.argmax(values))
    return values[i], float(betas[i])


def grid_gamma_opt(
    interval: UncertaintyInterval,
    c: float,
    omega_star: float,
    gammas: Sequence[float],
    n_beta: int = 10_000,
) -> tuple[float, float]:
    """Argmin over ``gammas`` of the grid worst case, vectorised over targets."""
    one_minus_g1, g1, half = _factors(c, omega_star)
    betas = np.linspace(interval.beta_low, interval.beta_high, n_beta)[None, :]
    g = np.asarray(gammas, dtype=float)[:, None]
    stable = betas >= g * half / one_minus_g1
    j = np.where(stable, betas - g * half / one_minus_g1, (one_minus_g1 * betas + g * half) / (1.0 + g1))
    worst = j.max(axis=1)
    i = int(np.argmin(worst))
    return float(g[i, 0]), float(worst[i])


@dataclass
class TuningReport:
    a_star: float
    beta_star: float
    omega_star: float
    beta_low: float
    beta_high: float
    c: float
    gamma_opt: float
    predicted_j: float
    vertices: list[dict] = field(default_factory=list)

    FIELDS = ("a_star", "beta_star", "omega_star", "beta_low", "beta_high", "c", "gamma_opt", "predicted_j")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.FIELDS)
        w.writerow([repr(float(getattr(self, f))) for f in self.FIELDS])
        return buf.getvalue()

    def summary(self) -> str:
        return "\n".join(
            [
                f"target amplitude A*      {self.a_star:.6g} rad",
                f"burst width beta*        {self.beta_star:.6g} s",
                f"frequency omega*         {self.omega_star:.6g} rad/s",
                f"beta interval            [{self.beta_low:.6g}, {self.beta_high:.6g}] s",
                f"adaptation pole c        {self.c:.6g} 1/s",
                f"optimal gain gamma_opt   {self.gamma_opt:.6g}",
                f"predicted worst-case J   {self.predicted_j:.6g} s",
            ]
        )


_PARAM_NAMES = ("lambda_gain", "xi", "omega_n")


def beta_interval_from_uncertainty(
    a_star: float,
    p: PlantParams,
    rel_bounds: Mapping[str, float],
    interior_samples: int = 100,
    seed: int = 0,
) -> tuple[UncertaintyInterval, list[dict]]:
    """Design-width range over a box of relative plant-parameter perturbations.

    Endpoints come from the box vertices; random interior points then check
    that none escapes the vertex range.
    """
    unknown = set(rel_bounds) - set(_PARAM_NAMES)
    if unknown:
        raise InvalidInputError(f"unknown plant parameters {sorted(unknown)}")
    axes = []
    for name in _PARAM_NAMES:
        r = float(rel_bounds.get(name, 0.0))
        if not 0 <= r < 1:
            raise InvalidInputError(f"relative bound for {name} must lie in [0, 1)")
        axes.append((-r, r) if r > 0 else (0.0,))
    vertices = []
    for combo in itertools.product(*axes):
        pv = replace(p, **{n: getattr(p, n) * (1 + d) for n, d in zip(_PARAM_NAMES, combo)})
        dp = solve_design_point(a_star, pv)
        vertices.append({**asdict(pv), "beta_star": dp.beta_star, "omega_star": dp.omega_star})
    betas = [v["beta_star"] for v in vertices]
    lo, hi = min(betas), max(betas)
    if interior_samples and len(vertices) > 1:
        rng = np.random.default_rng(seed)
        slack = 1e-9 * hi
        for _ in range(interior_samples):
            pv = replace(
                p,
                **{
                    n: getattr(p, n) * (1 + rng.uniform(ax[0], ax[-1]))
                    for n, ax in zip(_PARAM_NAMES, axes)
                },
            )
            b = solve_design_point(a_star, pv).beta_star
            if not lo - slack <= b <= hi + slack:
                raise InvalidInputError(
                    f"interior sample {asdict(pv)} gives beta*={b} outside vertex range [{lo}, {hi}]"
                )
    return UncertaintyInterval(lo, hi), vertices


def tune(
    a_star: float,
    p: PlantParams,
    c: float,
    uncertainty: Mapping[str, float] | None = None,
    beta_interval: UncertaintyInterval | None = None,
) -> TuningReport:
    """Target amplitude to design width, width interval and optimal gain."""
    design: DesignPoint = solve_design_point(a_star, p)
    vertices: list[dict] = []
    if beta_interval is None:
        if uncertainty:
            beta_interval, vertices = beta_interval_from_uncertainty(a_star, p, uncertainty)
        else:
            beta_interval = UncertaintyInterval(design.beta_star, design.beta_star)
    g = gamma_opt(beta_interval, c, design.omega_star)
    value, _ = worst_case(g, beta_interval, c, design.omega_star)
    return TuningReport(
        a_star=a_star,
        beta_star=design.beta_star,
        omega_star=design.omega_star,
        beta_low=beta_interval.beta_low,
        beta_high=beta_interval.beta_high,
        c=c,
        gamma_opt=g,
        predicted_j=value,
        vertices=vertices,
    )


def verify_vertices(report: TuningReport, a_star: float, tol: float = 1e-6) -> bool:
    """Each vertex design width reproduces ``a_star`` through a forward solve."""
    for v in report.vertices:
        pv = PlantParams(v["lambda_gain"], v["xi"], v["omega_n"])
        if abs(solve_hb(v["beta_star"], pv).amplitude - a_star) > tol:
            return False
    return True
