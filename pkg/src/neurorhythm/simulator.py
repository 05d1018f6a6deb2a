"""Event-driven closed-loop simulation of the burst-controlled pendulum.

Two sensors watch the pendulum.  A zero crossing of the angle is an actuation
event: the controller fires a rectangular burst of width ``beta`` signed by
the angular velocity.  A zero crossing of the velocity (a peak) is an
adaptation event: a signed impulse enters the first-order adaptation filter
``gamma / (s + c)`` whose output is ``beta``.

The pendulum is integrated with fixed-step RK4.  Steps are cut short at burst
ends, and sensor crossings are located by bisection on a cubic Hermite
interpolant of the step before re-integrating up to the event instant.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import DivergenceError, InvalidInputError, WindowError
from .plant import PlantParams, PlantState

ACTUATION = "actuation"
ADAPTATION = "adaptation"

DEFAULT_DT_FRAC = 1e-3
EVENT_TOL_FRAC = 1e-10
SAMPLE_HEADER = ("t", "y", "ydot", "u", "beta")
EVENT_HEADER = ("t", "kind", "sign", "y", "ydot")


@dataclass(frozen=True)
class AdaptiveParams:
    """Adaptation filter ``H(s) = gamma / (s + c)``.

    ``gamma = 0`` switches adaptation off and ``c = 0`` makes the filter a
    pure integrator; both together freeze ``beta`` at its initial value.
    """

    gamma: float
    c: float

    def __post_init__(self):
        for name, v in (("gamma", self.gamma), ("c", self.c)):
            if not math.isfinite(v) or v < 0:
                raise InvalidInputError(f"{name} must be finite and >= 0, got {v!r}")

    @classmethod
    def frozen(cls) -> "AdaptiveParams":
        return cls(gamma=0.0, c=0.0)


@dataclass(frozen=True)
class AdaptiveState:
    beta_value: float
    last_update: float = 0.0


@dataclass(frozen=True)
class EventRecord:
    time: float
    kind: str
    sign: int
    y: float
    ydot: float
    beta: float = math.nan  # filter output just before the event


@dataclass
class BurstState:
    active: bool = False
    sign: int = 1
    start: float = 0.0
    width: float = 0.0

    @property
    def end(self) -> float:
        return self.start + self.width

    def output(self, t: float) -> int:
        if self.active and self.start <= t <= self.end:
            return self.sign
        return 0


@dataclass
class SimTrace:
    """Samples, sensor events and peaks of one closed-loop run."""

    t: np.ndarray
    y: np.ndarray
    ydot: np.ndarray
    u: np.ndarray
    beta: np.ndarray
    events: list[EventRecord] = field(default_factory=list)
    peaks: list[tuple[float, float]] = field(default_factory=list)

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    def actuation_events(self) -> list[EventRecord]:
        return [e for e in self.events if e.kind == ACTUATION]

    def adaptation_events(self) -> list[EventRecord]:
        return [e for e in self.events if e.kind == ADAPTATION]

    def beta_at_actuation(self) -> tuple[np.ndarray, np.ndarray]:
        """``(t_k, beta(t_k))`` sampled at actuation events."""
        ev = self.actuation_events()
        return np.array([e.time for e in ev]), np.array([e.beta for e in ev])

    def interpolant(self) -> CubicHermiteSpline:
        keep = np.concatenate(([True], np.diff(self.t) > 0))
        return CubicHermiteSpline(self.t[keep], self.y[keep], self.ydot[keep])

    def write_samples_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SAMPLE_HEADER)
            for row in zip(self.t, self.y, self.ydot, self.u, self.beta):
                w.writerow([repr(float(v)) for v in row[:3]] + [int(row[3]), repr(float(row[4]))])

    def write_events_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(EVENT_HEADER)
            for e in self.events:
                w.writerow([repr(e.time), e.kind, e.sign, repr(e.y), repr(e.ydot)])


def trace_from_signal(t, y, ydot) -> SimTrace:
    """Wrap a sampled signal as an uncontrolled trace, peaks located from ``ydot``.

    Mostly useful for feeding synthetic signals to :func:`measure_objectives`.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    ydot = np.asarray(ydot, dtype=float)
    spline = CubicHermiteSpline(t, y, ydot)
    peaks = []
    sgn = np.sign(ydot)
    for i in np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]:
        # linear guess on ydot is enough; the Hermite value of y is flat there
        tau = t[i] - ydot[i] * (t[i + 1] - t[i]) / (ydot[i + 1] - ydot[i])
        peaks.append((float(tau), abs(float(spline(tau)))))
    zeros = np.zeros_like(t)
    return SimTrace(t=t, y=y, ydot=ydot, u=zeros, beta=zeros.copy(), peaks=peaks)


def step_adaptive(state: AdaptiveState, to_time: float, c: float) -> AdaptiveState:
    """Exact free decay ``beta(t) = beta(t0) exp(-c (t - t0))``."""
    dt = to_time - state.last_update
    if dt < 0:
        raise InvalidInputError(f"cannot step adaptive state backwards by {dt}")
    if dt == 0 or state.beta_value == 0.0:
        return AdaptiveState(state.beta_value, to_time)
    return AdaptiveState(state.beta_value * math.exp(-c * dt), to_time)


def apply_adaptation_impulse(state: AdaptiveState, sign: int, gamma: float) -> AdaptiveState:
    return AdaptiveState(state.beta_value + sign * gamma, state.last_update)


def adaptive_response(impulses, t: float, gamma: float, c: float) -> float:
    """Direct convolution sum of signed impulses ``(tau, sign)`` with ``gamma e^{-c t}``."""
    return sum(s * gamma * math.exp(-c * (t - tau)) for tau, s in impulses if tau < t)


def actuation_sign(y: float, ydot: float) -> int:
    return -1 if ydot < 0 else 1


def adaptation_sign(y_at_peak: float, a_star: float) -> int:
    """Grow bursts when the peak falls short of ``a_star``, shrink otherwise."""
    return -1 if a_star - abs(y_at_peak) < 0 else 1


def literal_adaptation_sign(y_at_peak: float, a_star: float) -> int:
    """Signed-peak variant ``sgn(a_star - y)``; troughs always count as short."""
    return -1 if a_star - y_at_peak < 0 else 1


AdaptationRule = Literal["peak", "literal"]
_ADAPTATION_RULES = {"peak": adaptation_sign, "literal": literal_adaptation_sign}


def _hermite_root(t0, h, v0, d0, v1, d1, tol):
    """Root of the cubic Hermite interpolant on ``[t0, t0 + h]`` by bisection.

    Requires ``v0`` and ``v1`` on opposite sides of zero (``v1`` may be zero).
    """
    m0 = d0 * h
    m1 = d1 * h
    lo, hi = 0.0, 1.0
    neg_at_lo = v0 < 0
    while (hi - lo) * h > tol:
        s = 0.5 * (lo + hi)
        s2 = s * s
        s3 = s2 * s
        val = (2 * s3 - 3 * s2 + 1) * v0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * v1 + (s3 - s2) * m1
        if (val < 0) == neg_at_lo and val != 0:
            lo = s
        else:
            hi = s
    return t0 + hi * h


def run_closed_loop(
    p: PlantParams,
    a: AdaptiveParams,
    a_star: float,
    init: PlantState | None = None,
    beta0: float = 0.0,
    horizon: float | None = None,
    dt: float | None = None,
    *,
    horizon_periods: float = 200.0,
    adaptation_rule: AdaptationRule = "peak",
    control_enabled: bool = True,
    record_samples: bool = True,
) -> SimTrace:
    """Integrate the full event-based loop and record everything that happens.

    Parameters
    ----------
    p, a : plant and adaptation-filter parameters.
    a_star : target oscillation amplitude (rad) used by the adaptation sensor.
    init : initial pendulum state, default ``y = 0.05``, ``ydot = 0``.
    beta0 : initial filter output.
    horizon : simulated duration in seconds; defaults to ``horizon_periods``
        natural periods.
    dt : RK4 step, default ``1e-3`` of the natural period.
    adaptation_rule : ``"peak"`` compares ``|y|`` at a peak with ``a_star``,
        ``"literal"`` compares the signed value.
    control_enabled : when False no sensor events are generated and ``u = 0``.
    record_samples : when False only events and peaks are kept (samples are
        recorded at events only), which saves memory on long sweeps.

    Raises
    ------
    DivergenceError
        If the state stops being finite.
    """
    if init is None:
        init = PlantState(0.05, 0.0)
    period = p.natural_period
    if horizon is None:
        horizon = horizon_periods * period
    if dt is None:
        dt = DEFAULT_DT_FRAC * period
    if not (math.isfinite(horizon) and horizon > 0 and math.isfinite(dt) and dt > 0):
        raise InvalidInputError("horizon and dt must be finite and > 0")
    if not math.isfinite(beta0):
        raise InvalidInputError("beta0 must be finite")
    sign_rule = _ADAPTATION_RULES[adaptation_rule]
    event_tol = EVENT_TOL_FRAC * period

    k_damp = 2.0 * p.xi * p.omega_n
    k_spring = p.omega_n**2
    lam = p.lambda_gain
    gamma, c = a.gamma, a.c
    sin = math.sin
    exp = math.exp

    def rk4(y, v, u, h):
        f = lam * u
        a1 = -k_damp * v - k_spring * sin(y) + f
        y2 = y + 0.5 * h * v
        v2 = v + 0.5 * h * a1
        a2 = -k_damp * v2 - k_spring * sin(y2) + f
        y3 = y + 0.5 * h * v2
        v3 = v + 0.5 * h * a2
        a3 = -k_damp * v3 - k_spring * sin(y3) + f
        y4 = y + h * v3
        v4 = v + h * a3
        a4 = -k_damp * v4 - k_spring * sin(y4) + f
        return (
            y + h / 6.0 * (v + 2.0 * v2 + 2.0 * v3 + v4),
            v + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4),
        )

    t = 0.0
    y = init.y
    v = init.ydot
    beta_val = beta0
    beta_time = 0.0
    burst = BurstState()
    u = 0

    def accel(yy, vv, uu):
        return -k_damp * vv - k_spring * sin(yy) + lam * uu

    # Side of zero each sensor channel is on; a tangency at start is resolved
    # by the sign of the channel's derivative.
    def side(value, slope):
        if value > 0 or (value == 0 and slope > 0):
            return 1
        if value < 0 or (value == 0 and slope < 0):
            return -1
        return 1

    y_side = side(y, v)
    v_side = side(v, accel(y, v, 0))

    ts, ys, vs, us, bs = [t], [y], [v], [u], [beta_val]
    events: list[EventRecord] = []
    peaks: list[tuple[float, float]] = []

    def record(tt, yy, vv, uu, bb):
        ts.append(tt)
        ys.append(yy)
        vs.append(vv)
        us.append(uu)
        bs.append(bb)

    t_end = horizon
    while t < t_end - 1e-12 * period:
        h = min(dt, t_end - t)
        if burst.active:
            remaining = burst.end - t
            if remaining <= 0:
                burst.active = False
                u = 0
            elif remaining < h:
                h = remaining
        y1, v1 = rk4(y, v, u, h)
        if not (math.isfinite(y1) and math.isfinite(v1)):
            raise DivergenceError(f"state diverged after t={t:.6g}", last_time=t)

        # resting exactly on zero is not a crossing
        hit_y = control_enabled and y1 * y_side <= 0 and (y1 != 0 or y != 0)
        hit_v = control_enabled and v1 * v_side <= 0 and (v1 != 0 or v != 0)
        if hit_y or hit_v:
            a0 = accel(y, v, u)
            a_1 = accel(y1, v1, u)
            tau_y = _hermite_root(t, h, y, v, y1, v1, event_tol) if hit_y else math.inf
            tau_v = _hermite_root(t, h, v, a0, v1, a_1, event_tol) if hit_v else math.inf
            tau = min(tau_y, tau_v)
            if tau < t + h:
                y1, v1 = rk4(y, v, u, tau - t)
            t = tau
            y, v = y1, v1
            if burst.active and t >= burst.end:
                burst.active = False
                u = 0
            beta_val *= exp(-c * (t - beta_time))
            beta_time = t
            if tau_y <= tau_v:
                y_side = -y_side
                sgn = actuation_sign(y, v)
                width = max(beta_val, 0.0)
                events.append(EventRecord(t, ACTUATION, sgn, y, v, beta_val))
                burst = BurstState(active=width > 0, sign=sgn, start=t, width=width)
                u = sgn if burst.active else 0
            else:
                v_side = -v_side
                sgn = sign_rule(y, a_star)
                events.append(EventRecord(t, ADAPTATION, sgn, y, v, beta_val))
                peaks.append((t, abs(y)))
                beta_val += sgn * gamma
            record(t, y, v, u, beta_val)
            continue

        t += h
        y, v = y1, v1
        if y != 0:
            y_side = 1 if y > 0 else -1
        if v != 0:
            v_side = 1 if v > 0 else -1
        if burst.active and t >= burst.end - 1e-15 * period:
            burst.active = False
            u = 0
        if record_samples:
            record(t, y, v, u, beta_val * exp(-c * (t - beta_time)))

    if not record_samples:
        record(t, y, v, u, beta_val * exp(-c * (t - beta_time)))
    return SimTrace(
        t=np.array(ts),
        y=np.array(ys),
        ydot=np.array(vs),
        u=np.array(us, dtype=int),
        beta=np.array(bs),
        events=events,
        peaks=peaks,
    )


@dataclass(frozen=True)
class Objectives:
    """Tail-window diagnostics of a trace.

    ``amplitude_error`` is ``|a_star - max tail peak|``; ``ultimate_error``
    approximates ``limsup |A(t) - a_star|`` by the sup over tail peaks.
    """

    periodicity: float
    amplitude_error: float
    ultimate_error: float


def _tail_start(trace: SimTrace, tail_fraction: float) -> float:
    if not 0 < tail_fraction <= 1:
        raise InvalidInputError("tail_fraction must lie in (0, 1]")
    return float(trace.t[-1] - tail_fraction * trace.duration)


def measure_objectives(
    trace: SimTrace, a_star: float, omega_ref: float, tail_fraction: float = 0.25
) -> Objectives:
    """Periodicity residual and amplitude errors over the trailing window."""
    t0 = _tail_start(trace, tail_fraction)
    period = 2.0 * math.pi / omega_ref
    t_last = trace.t[-1] - period
    if t_last - t0 < 9.0 * period or t0 < trace.t[0]:
        raise WindowError(
            f"tail window of {trace.t[-1] - t0:.4g}s holds fewer than 10 periods of {period:.4g}s"
        )
    spline = trace.interpolant()
    grid = np.linspace(t0, t_last, int(math.ceil(200 * (t_last - t0) / period)) + 1)
    periodicity = float(np.max(np.abs(spline(grid + period) - spline(grid))))
    tail_peaks = [a for tp, a in trace.peaks if tp >= t0]
    if not tail_peaks:
        raise WindowError("no peaks inside the tail window")
    amp_err = abs(a_star - max(tail_peaks))
    ultimate = max(abs(a - a_star) for a in tail_peaks)
    return Objectives(periodicity, amp_err, ultimate)


def steady_state(trace: SimTrace, tail_fraction: float = 0.25) -> tuple[float, float]:
    """Mean tail peak amplitude and oscillation frequency.

    The frequency comes from the mean spacing of actuation events, which is a
    half period on a symmetric limit cycle.
    """
    t0 = _tail_start(trace, tail_fraction)
    amps = [a for tp, a in trace.peaks if tp >= t0]
    times = [e.time for e in trace.actuation_events() if e.time >= t0]
    if len(amps) < 2 or len(times) < 3:
        raise WindowError("too few peaks or crossings in the tail window")
    half_period = (times[-1] - times[0]) / (len(times) - 1)
    return float(np.mean(amps)), math.pi / half_period


def check_event_alternation(trace: SimTrace) -> bool:
    """Exactly one adaptation event between consecutive actuation events."""
    count = None
    for e in trace.events:
        if e.kind == ACTUATION:
            if count is not None and count != 1:
                return False
            count = 0
        elif count is not None:
            count += 1
    return True


def tail_variance(values, tail_fraction: float = 0.25) -> float:
    values = np.asarray(values, dtype=float)
    n = max(2, int(round(len(values) * tail_fraction)))
    return float(np.var(values[-n:]))


def pendulum_energy(y, ydot, p: PlantParams):
    return 0.5 * np.asarray(ydot) ** 2 + p.omega_n**2 * (1.0 - np.cos(y))
