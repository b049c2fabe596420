"""Event-driven integration of the fed-batch cycle.

Between impulses the state follows the smooth depletion flow; hitting the
decant threshold in resource 1 triggers the instantaneous
emptying-and-refilling jump. A run strings cycles together until the
biomass converges to the once-per-cycle orbit, washes out, stalls, or
exhausts its budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .geometry import (
    OrbitDiesBeforeImpulseError,
    Segment,
    SegmentLeavesRegionError,
    cycle_time,
    mu_of_r,
    s_hat_plus,
)
from .model import ReactorConfig, State, eval_F, impulse_map, require_valid

OUTCOME_CONVERGED = "ConvergedToPeriodic"
OUTCOME_WASHOUT = "Washout"
OUTCOME_STALLED = "StalledCycleTime"
OUTCOME_BUDGET = "BudgetExhausted"

PHASE_FLOW = "flow"
PHASE_IMPULSE = "impulse"


class IntegrationFailureError(RuntimeError):
    """The adaptive integrator gave up mid-arc."""


@dataclass(frozen=True)
class IntegratorSettings:
    """Tolerances and budgets for event-driven runs.

    washout_x is the biomass level treated as extinct; below it the run
    ends only if the growth rate also sits below the decay rate, so a dip
    during a recovering transient does not end the run. stall_factor
    flags cycles whose duration blows past the periodic-orbit time.
    """

    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    event_tol: float = 1e-10
    max_cycles: int = 200
    t_max: float = 1e6
    washout_x: float = 1e-12
    converge_tol: float = 1e-6
    converge_window: int = 3
    stall_factor: float = 20.0

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "event_tol", "t_max",
                     "washout_x", "converge_tol", "stall_factor"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.max_cycles < 1:
            raise ValueError("max_cycles must be at least 1")
        if self.converge_window < 1:
            raise ValueError("converge_window must be at least 1")


@dataclass(frozen=True)
class CycleRecord:
    """One completed cycle: the arc endpoint just before the jump and the
    refilled state just after. index counts from 1."""

    index: int
    t_minus: float
    state_minus: State
    state_plus: State
    duration: float
    x_growth: float


@dataclass(frozen=True)
class RunOutcome:
    kind: str
    cycles_completed: int
    final_state: State
    limit_x_post: float | None = None


@dataclass(frozen=True)
class FlowResult:
    state: State
    samples: list[tuple[float, np.ndarray, float, str]] = field(repr=False, default_factory=list)
    reason: str = "threshold"


@dataclass(frozen=True)
class RunResult:
    cycles: list[CycleRecord]
    outcome: RunOutcome
    trajectory: list[tuple[float, np.ndarray, float, str]] = field(repr=False, default_factory=list)


def _rhs(cfg: ReactorConfig):
    inv_y = cfg.inverse_yields()
    D = cfg.D

    def rhs(t, z):
        s = np.maximum(z[:-1], 0.0)
        x = z[-1]
        rate = eval_F(cfg, s)
        ds = -(inv_y * rate) * x
        dx = (rate - D) * x
        return np.append(ds, dx)

    return rhs


def integrate_flow(cfg: ReactorConfig, start: State,
                   settings: IntegratorSettings | None = None,
                   n_samples: int = 0) -> FlowResult:
    """Follow the depletion flow from start until the decant threshold, a
    definitive washout, or the time horizon.

    Returns the terminal state, optional dense samples, and which stop
    fired: "threshold", "washout", or "horizon". A biomass crossing of
    washout_x only counts as washout while the growth rate is below the
    decay rate; otherwise integration resumes from the crossing.
    """
    settings = settings or IntegratorSettings()
    if start.s[0] < cfg.s1_bar - settings.event_tol:
        raise ValueError(
            f"flow start has s1={start.s[0]!r} below the decant threshold {cfg.s1_bar!r}")

    if start.x < settings.washout_x and eval_F(cfg, start.s) < cfg.D:
        return FlowResult(state=start, samples=[], reason="washout")

    rhs = _rhs(cfg)

    def hit_threshold(t, z):
        return z[0] - cfg.s1_bar

    hit_threshold.terminal = True
    hit_threshold.direction = -1.0

    def hit_washout(t, z):
        return z[-1] - settings.washout_x

    hit_washout.terminal = True
    hit_washout.direction = -1.0

    # biomass needs a much tighter floor than the resources, or the solver's
    # noise floor sits above the washout level and the event never fires
    atol = np.array([settings.abs_tol] * cfg.n
                    + [min(settings.abs_tol, settings.washout_x * 1e-3)])

    t0 = start.t
    z0 = np.append(start.s, start.x)
    pieces = []
    reason = "horizon"
    while True:
        if t0 >= settings.t_max:
            break
        sol = solve_ivp(
            rhs, (t0, settings.t_max), z0, method="RK45",
            rtol=settings.rel_tol, atol=atol, dense_output=n_samples > 0,
            events=(hit_threshold, hit_washout))
        if sol.status == -1:
            raise IntegrationFailureError(f"integration failed at t={sol.t[-1]}: {sol.message}")
        pieces.append(sol)
        if sol.status == 0:
            break
        threshold_hit = len(sol.t_events[0]) > 0
        if threshold_hit and len(sol.t_events[1]) > 0:
            # both fired in one window; the earlier one ended the piece
            threshold_hit = sol.t_events[0][-1] <= sol.t_events[1][-1]
        if threshold_hit:
            t_end = float(sol.t_events[0][-1])
            z_end = sol.y_events[0][-1].copy()
            z_end[0] = cfg.s1_bar
            reason = "threshold"
            t0, z0 = t_end, z_end
            break
        # washout event: definitive only while decaying
        t_end = float(sol.t_events[1][-1])
        z_end = sol.y_events[1][-1].copy()
        if eval_F(cfg, np.maximum(z_end[:-1], 0.0)) < cfg.D:
            reason = "washout"
            t0, z0 = t_end, z_end
            break
        t0, z0 = t_end, z_end

    if reason == "horizon":
        t0 = float(pieces[-1].t[-1])
        z0 = pieces[-1].y[:, -1].copy()

    samples: list[tuple[float, np.ndarray, float, str]] = []
    if n_samples > 0:
        for t in np.linspace(start.t, t0, n_samples):
            for sol in pieces:
                if sol.t[0] <= t <= sol.t[-1]:
                    z = sol.sol(t)
                    samples.append((float(t), np.maximum(z[:-1], 0.0), float(z[-1]), PHASE_FLOW))
                    break

    end = State(s=np.maximum(z0[:-1], 0.0), x=float(z0[-1]), t=t0)
    return FlowResult(state=end, samples=samples, reason=reason)


def detect_outcome(history: list[CycleRecord], cfg: ReactorConfig,
                   settings: IntegratorSettings,
                   mu: float | None = None,
                   periodic_cycle_time: float | None = None) -> RunOutcome | None:
    """Decide whether the cycle history already settles the run.

    Convergence means the last converge_window post-impulse biomass values
    all sit within converge_tol (relative) of the once-per-cycle orbit's
    level. A stall means cycle durations have left any plausible scale:
    past stall_factor times the periodic cycle time when that is known,
    or strictly inflating by an order of magnitude when it is not.
    """
    if not history:
        return None
    last = history[-1]

    if mu is not None and mu > 0.0:
        target = (1.0 - cfg.r) * mu / cfg.r
        window = history[-settings.converge_window:]
        if len(window) == settings.converge_window and all(
                abs(rec.state_plus.x - target) <= settings.converge_tol * target
                for rec in window):
            return RunOutcome(
                kind=OUTCOME_CONVERGED, cycles_completed=last.index,
                final_state=last.state_plus, limit_x_post=target)

    if periodic_cycle_time is not None:
        if last.duration > settings.stall_factor * periodic_cycle_time:
            return RunOutcome(
                kind=OUTCOME_STALLED, cycles_completed=last.index,
                final_state=last.state_plus)
    elif len(history) >= 3:
        durations = [rec.duration for rec in history]
        inflating = all(b > a for a, b in zip(durations, durations[1:]))
        if inflating and durations[-1] > 10.0 * durations[0]:
            return RunOutcome(
                kind=OUTCOME_STALLED, cycles_completed=last.index,
                final_state=last.state_plus)
    return None


def run(cfg: ReactorConfig, s0, x0: float,
        settings: IntegratorSettings | None = None,
        samples_per_cycle: int = 0) -> RunResult:
    """Run the impulsive system from (s0, x0) until it settles.

    The outcome is one of ConvergedToPeriodic, Washout, StalledCycleTime,
    or BudgetExhausted (cycle or time budget spent first).
    """
    require_valid(cfg)
    settings = settings or IntegratorSettings()
    s0 = np.asarray(s0, dtype=float)
    if s0.shape != (cfg.n,):
        raise ValueError(f"s0 has shape {s0.shape}, expected ({cfg.n},)")
    if s0[0] <= cfg.s1_bar:
        raise ValueError(
            f"s0 must start above the decant threshold ({s0[0]!r} <= {cfg.s1_bar!r})")
    if x0 <= 0.0:
        raise ValueError(f"x0 must be positive, got {x0}")

    # the once-per-cycle orbit, when it exists, anchors both detectors
    mu = None
    t_periodic = None
    try:
        mu = mu_of_r(cfg, cfg.r, None)
        if mu > 0.0:
            fill = s_hat_plus(cfg)
            x_post = (1.0 - cfg.r) * mu / cfg.r
            t_periodic = cycle_time(Segment(fill, cfg), x_post, None)
    except (SegmentLeavesRegionError, OrbitDiesBeforeImpulseError, ValueError):
        mu = None
        t_periodic = None

    state = State(s=s0, x=float(x0), t=0.0)
    cycles: list[CycleRecord] = []
    trajectory: list[tuple[float, np.ndarray, float, str]] = []
    outcome = None

    for index in range(1, settings.max_cycles + 1):
        flow = integrate_flow(cfg, state, settings, samples_per_cycle)
        trajectory.extend(flow.samples)
        if flow.reason == "washout":
            outcome = RunOutcome(
                kind=OUTCOME_WASHOUT, cycles_completed=len(cycles),
                final_state=flow.state)
            break
        if flow.reason == "horizon":
            outcome = RunOutcome(
                kind=OUTCOME_BUDGET, cycles_completed=len(cycles),
                final_state=flow.state)
            break
        pre = flow.state
        post = impulse_map(cfg, pre, settings.event_tol)
        duration = pre.t - state.t
        cycles.append(CycleRecord(
            index=index, t_minus=pre.t, state_minus=pre, state_plus=post,
            duration=duration, x_growth=post.x / (1.0 - cfg.r) - state.x))
        if samples_per_cycle > 0:
            trajectory.append((post.t, post.s.copy(), post.x, PHASE_IMPULSE))
        state = post
        outcome = detect_outcome(cycles, cfg, settings, mu, t_periodic)
        if outcome is not None:
            break

    if outcome is None:
        outcome = RunOutcome(
            kind=OUTCOME_BUDGET, cycles_completed=len(cycles), final_state=state)
    return RunResult(cycles=cycles, outcome=outcome, trajectory=trajectory)
