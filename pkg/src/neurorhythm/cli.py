"""Command line front end: sweeps, single runs and tuning.

Exit status is 0 on success, 1 on a usage error and 2 on a numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import experiments, robust_opt, slow_model, svgplot
from .describing_fn import solve_design_point
from .errors import (
    BracketError,
    DivergenceError,
    InvalidInputError,
    NonMonotoneError,
    OutOfModelError,
    PoleOnAxisError,
    UnachievableAmplitudeError,
    WindowError,
    WrongBranchError,
)
from .experiments import SimSettings
from .plant import PlantParams, PlantState
from .simulator import AdaptiveParams, measure_objectives, run_closed_loop, steady_state

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2
NUMERICAL_ERRORS = (
    BracketError,
    DivergenceError,
    NonMonotoneError,
    OutOfModelError,
    PoleOnAxisError,
    UnachievableAmplitudeError,
    WindowError,
    WrongBranchError,
)


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    plant: PlantParams = field(default_factory=PlantParams)
    adaptive: AdaptiveParams = field(default_factory=lambda: AdaptiveParams(0.0075, experiments.DEFAULT_C))
    a_star: float = 0.5
    horizon_periods: float = 200.0
    dt_frac: float = 1e-3
    y0: float = 0.05
    beta0: float = 0.0
    out: Path = Path("out")
    jobs: int = 1

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        cfg = cls(
            plant=PlantParams(args.lambda_gain, args.xi, args.omega_n),
            adaptive=AdaptiveParams(args.gamma, args.c),
            a_star=args.a_star,
            horizon_periods=args.horizon_periods or 200.0,
            dt_frac=args.dt_frac,
            y0=args.y0,
            beta0=args.beta0,
            out=Path(args.out),
            jobs=args.jobs,
        )
        if not (cfg.a_star > 0 and cfg.horizon_periods > 0 and 0 < cfg.dt_frac < 0.1 and cfg.jobs >= 1):
            raise InvalidInputError("need a_star > 0, horizon_periods > 0, 0 < dt_frac < 0.1, jobs >= 1")
        return cfg

    def settings(self, **overrides) -> SimSettings:
        kw = dict(horizon_periods=self.horizon_periods, dt_frac=self.dt_frac, y0=self.y0, beta0=self.beta0)
        kw.update(overrides)
        return SimSettings(**kw)


# -- output helpers ----------------------------------------------------------


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return "" if math.isnan(v) else repr(float(v))
    return str(v)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(row[h]) for h in header])


def read_config(path) -> dict:
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


# -- commands ----------------------------------------------------------------


def cmd_hb_sweep(args, cfg: RunConfig) -> int:
    if not 0 < args.beta_min <= args.beta_max or args.points < 1:
        raise UsageError("need 0 < --beta-min <= --beta-max and --points >= 1")
    betas = np.linspace(args.beta_min, args.beta_max, args.points)
    settings = cfg.settings(horizon_periods=args.horizon_periods or 60.0)
    rows = experiments.hb_sweep(cfg.plant, betas, settings, cfg.jobs)
    header = ["beta", "omega_hb", "amp_hb", "omega_sim", "amp_sim"]
    write_csv(cfg.out / "hb_sweep.csv", header, rows + [experiments.hb_sweep_summary(rows)])
    col = {h: np.array([r[h] for r in rows], dtype=float) for h in header}
    svgplot.line_panels(
        cfg.out / "hb_sweep.svg",
        [
            {"series": [("HB", col["beta"], col["omega_hb"]), ("simulation", col["beta"], col["omega_sim"])],
             "xlabel": "burst width beta (s)", "ylabel": "frequency (rad/s)"},
            {"series": [("HB", col["beta"], col["amp_hb"]), ("simulation", col["beta"], col["amp_sim"])],
             "xlabel": "burst width beta (s)", "ylabel": "amplitude (rad)"},
        ],
        title="Limit cycle vs burst width",
    )
    return EXIT_OK


def cmd_simulate(args, cfg: RunConfig) -> int:
    p = cfg.plant
    trace = run_closed_loop(
        p,
        cfg.adaptive,
        cfg.a_star,
        init=PlantState(cfg.y0, 0.0),
        beta0=cfg.beta0,
        horizon_periods=cfg.horizon_periods,
        dt=cfg.dt_frac * p.natural_period,
        adaptation_rule=args.adaptation_rule,
    )
    trace.write_samples_csv(cfg.out / "trace.csv")
    trace.write_events_csv(cfg.out / "events.csv")
    lines = [f"events {len(trace.events)}  peaks {len(trace.peaks)}"]
    try:
        amp, omega = steady_state(trace)
        obj = measure_objectives(trace, cfg.a_star, omega)
        lines += [
            f"steady amplitude {amp:.6g} rad, frequency {omega:.6g} rad/s",
            f"periodicity residual {obj.periodicity:.3e}, amplitude error {obj.amplitude_error:.3e}, "
            f"ultimate error {obj.ultimate_error:.3e}",
        ]
    except WindowError as exc:
        lines.append(f"no steady-state metrics: {exc}")
    (cfg.out / "summary.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    stride = max(1, len(trace.t) // 4000)
    svgplot.line_panels(
        cfg.out / "trace.svg",
        [
            {"series": [("y", trace.t[::stride], trace.y[::stride])], "xlabel": "t (s)", "ylabel": "angle (rad)"},
            {"series": [("beta", trace.t[::stride], trace.beta[::stride])], "xlabel": "t (s)", "ylabel": "beta (s)"},
        ],
        title="Closed-loop simulation",
    )
    return EXIT_OK


def _log_range(text):
    lo, hi = (float(v) for v in text.split(","))
    if not 0 < lo <= hi:
        raise UsageError(f"invalid range {text!r}")
    return lo, hi


def cmd_heatmap(args, cfg: RunConfig) -> int:
    gl, gh = _log_range(args.gamma_range)
    cl, ch = _log_range(args.c_range)
    n = args.points_per_axis
    if n < 1:
        raise UsageError("--points-per-axis must be >= 1")
    gammas, cs = np.geomspace(gl, gh, n), np.geomspace(cl, ch, n)
    rows = experiments.heatmap(cfg.plant, cfg.a_star, gammas, cs, args.mode, cfg.settings(), cfg.jobs)
    write_csv(cfg.out / f"heatmap_{args.mode}.csv", ["gamma", "c", "error"], rows)
    grid = np.array([r["error"] for r in rows]).reshape(n, n)
    svgplot.heatmap(
        cfg.out / f"heatmap_{args.mode}.svg",
        gammas,
        cs,
        grid,
        title=f"Ultimate amplitude error ({args.mode} model)",
        xlabel="gamma (log)",
        ylabel="c (log)",
    )
    return EXIT_OK


def cmd_bifurcation(args, cfg: RunConfig) -> int:
    gammas = [float(g) for g in args.gammas.split(",") if g.strip()] if args.gammas else []
    if not gammas:
        raise UsageError("--gammas needs at least one value")
    runs = experiments.bifurcation(
        cfg.plant, cfg.a_star, gammas, cfg.adaptive.c, cfg.settings(horizon_periods=args.horizon_periods or 400.0), cfg.jobs
    )
    design = solve_design_point(cfg.a_star, cfg.plant)
    gstar = slow_model.bifurcation_gamma(cfg.adaptive.c, design)
    series_rows = []
    for r in runs:
        for k, (t, b) in enumerate(zip(r.full_t, r.full_beta)):
            sb = r.slow_beta[k] if k < len(r.slow_beta) else math.nan
            series_rows.append({"gamma": r.gamma, "k": k, "t": t, "beta_full": b, "beta_slow": sb})
    write_csv(cfg.out / "bifurcation_series.csv", ["gamma", "k", "t", "beta_full", "beta_slow"], series_rows)
    write_csv(
        cfg.out / "bifurcation_summary.csv",
        ["gamma", "gamma_ratio", "full_label", "slow_label"],
        [{"gamma": r.gamma, "gamma_ratio": r.gamma / gstar, "full_label": r.full_label, "slow_label": r.slow_label} for r in runs],
    )
    svgplot.line_panels(
        cfg.out / "bifurcation.svg",
        [
            {"series": [(f"gamma={r.gamma:.4g}", r.full_t, r.full_beta) for r in runs], "xlabel": "t (s)",
             "ylabel": "beta(t_k) full model"},
            {"series": [(f"gamma={r.gamma:.4g}", np.arange(len(r.slow_beta)), r.slow_beta) for r in runs],
             "xlabel": "k", "ylabel": "beta_k slow model"},
        ],
        title=f"Adaptation dynamics near gamma* = {gstar:.4g}",
    )
    for r in runs:
        print(f"gamma={r.gamma:.6g} ({r.gamma / gstar:.3g} gamma*): full {r.full_label}, slow {r.slow_label}")
    return EXIT_OK


def _interval(args, design) -> robust_opt.UncertaintyInterval | None:
    if args.beta_low is None and args.beta_high is None:
        return None
    if args.beta_low is None or args.beta_high is None:
        raise UsageError("--beta-low and --beta-high go together")
    return robust_opt.UncertaintyInterval(args.beta_low, args.beta_high)


def _write_report(cfg: RunConfig, report: robust_opt.TuningReport) -> None:
    (cfg.out / "tuning_report.csv").write_text(report.to_csv())
    (cfg.out / "tuning_report.txt").write_text(report.summary() + "\n")
    print(report.summary())


def cmd_tune(args, cfg: RunConfig) -> int:
    design = solve_design_point(cfg.a_star, cfg.plant)
    uncertainty = {k: v for k, v in (("lambda_gain", args.d_lambda), ("xi", args.d_xi), ("omega_n", args.d_omega_n)) if v}
    report = robust_opt.tune(cfg.a_star, cfg.plant, cfg.adaptive.c, uncertainty or None, _interval(args, design))
    _write_report(cfg, report)
    return EXIT_OK


def cmd_optimize(args, cfg: RunConfig) -> int:
    design = solve_design_point(cfg.a_star, cfg.plant)
    interval = _interval(args, design) or robust_opt.UncertaintyInterval(*experiments.REFERENCE_INTERVAL)
    c = cfg.adaptive.c
    report = robust_opt.tune(cfg.a_star, cfg.plant, c, beta_interval=interval)
    _write_report(cfg, report)

    gammas = np.geomspace(1e-3, 1.0, args.surface_points)
    cs = np.geomspace(1e-2, 1.0, args.surface_points)
    surface = experiments.worst_case_surface(interval, gammas, cs, design.omega_star)
    write_csv(cfg.out / "surface.csv", ["gamma", "c", "worst_j"], surface)

    betas = np.linspace(interval.beta_low, interval.beta_high, args.sim_points)
    dots = experiments.burst_width_errors(
        cfg.plant, betas, report.gamma_opt, c, cfg.settings(horizon_periods=args.horizon_periods or 300.0), cfg.jobs
    )
    for d in dots:
        d["surface_j"] = report.predicted_j
    write_csv(cfg.out / "burst_errors.csv", ["beta_star", "a_star_sim", "error_sim", "surface_j"], dots)

    at_c = [row for row in surface if row["c"] == cs[np.argmin(np.abs(cs - c))]]
    svgplot.line_panels(
        cfg.out / "optimize.svg",
        [
            {"series": [("sup J at nearest c", [r["gamma"] for r in at_c], [r["worst_j"] for r in at_c])],
             "xlabel": "gamma (log)", "ylabel": "worst-case J (s)", "logx": True},
            {"series": [("simulated error", betas, [d["error_sim"] for d in dots]),
                        ("analytic sup J", betas, [report.predicted_j] * len(betas))],
             "xlabel": "beta* (s)", "ylabel": "burst-width error (s)", "markers": True},
        ],
        title=f"Robust tuning, gamma_opt = {report.gamma_opt:.4g}",
    )
    return EXIT_OK


# -- parser ------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("common")
    g.add_argument("--lambda", dest="lambda_gain", type=float, default=15.0, help="input gain")
    g.add_argument("--xi", type=float, default=0.1, help="damping ratio")
    g.add_argument("--omega-n", dest="omega_n", type=float, default=8.0, help="natural frequency (rad/s)")
    g.add_argument("--a-star", dest="a_star", type=float, default=0.5, help="target amplitude (rad)")
    g.add_argument("--gamma", type=float, default=0.0075, help="adaptation gain")
    g.add_argument("--c", type=float, default=experiments.DEFAULT_C, help="adaptation pole (1/s)")
    g.add_argument("--horizon-periods", dest="horizon_periods", type=float, default=None,
                   help="simulated natural periods (command-specific default)")
    g.add_argument("--dt-frac", dest="dt_frac", type=float, default=1e-3, help="RK4 step as a fraction of the natural period")
    g.add_argument("--y0", type=float, default=0.05, help="initial angle (rad)")
    g.add_argument("--beta0", type=float, default=0.0, help="initial burst width (s)")
    g.add_argument("--out", default="out", help="output directory")
    g.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    g.add_argument("--config", default=None, help="key = value file; flags take precedence")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="neurorhythm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("hb-sweep", help="limit cycle vs burst width")
    p.add_argument("--beta-min", dest="beta_min", type=float, default=0.01)
    p.add_argument("--beta-max", dest="beta_max", type=float, default=0.2)
    p.add_argument("--points", type=int, default=40)
    p.set_defaults(func=cmd_hb_sweep)

    p = sub.add_parser("simulate", help="single closed-loop run with trace export")
    p.add_argument("--adaptation-rule", dest="adaptation_rule", choices=("peak", "literal"), default="peak")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("heatmap", help="ultimate amplitude error over (gamma, c)")
    p.add_argument("--gamma-range", dest="gamma_range", default="0.01,1")
    p.add_argument("--c-range", dest="c_range", default="0.01,1")
    p.add_argument("--points-per-axis", dest="points_per_axis", type=int, default=16)
    p.add_argument("--mode", choices=("full", "slow"), default="full")
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("bifurcation", help="burst-width dynamics around gamma*")
    p.add_argument("--gammas", default="", help="comma-separated gains")
    p.set_defaults(func=cmd_bifurcation)

    for name, func, helptext in (
        ("optimize", cmd_optimize, "robust gain, worst-case surface and simulated errors"),
        ("tune", cmd_tune, "four-step tuning report"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--beta-low", dest="beta_low", type=float, default=None)
        p.add_argument("--beta-high", dest="beta_high", type=float, default=None)
        if name == "optimize":
            p.add_argument("--surface-points", dest="surface_points", type=int, default=25)
            p.add_argument("--sim-points", dest="sim_points", type=int, default=7)
        else:
            p.add_argument("--d-lambda", dest="d_lambda", type=float, default=0.0, help="relative bound on lambda")
            p.add_argument("--d-xi", dest="d_xi", type=float, default=0.0, help="relative bound on xi")
            p.add_argument("--d-omega-n", dest="d_omega_n", type=float, default=0.0, help="relative bound on omega_n")
        p.set_defaults(func=func)

    for sp in sub.choices.values():
        _common(sp)
    return parser


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        values = read_config(args.config)
        sp = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sp._actions}
        defaults = {}
        for key, raw in values.items():
            key = {"lambda": "lambda_gain"}.get(key, key)
            if key not in known or key in ("config", "help"):
                raise UsageError(f"unknown config key {key!r}")
            action = known[key]
            defaults[key] = action.type(raw) if action.type else raw
        sp.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse_args(argv)
        cfg = RunConfig.from_args(args)
        os.makedirs(cfg.out, exist_ok=True)
        return args.func(args, cfg)
    except (UsageError, InvalidInputError, ValueError) as exc:
        if isinstance(exc, NUMERICAL_ERRORS):
            print(f"numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NUMERICAL_ERRORS + (ArithmeticError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
