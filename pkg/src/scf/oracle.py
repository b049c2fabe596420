"""Slow, simple cross-checks for the fast numerics.

Everything here is deliberately independent of the quadrature and
event-driven integration modules: the arc-gain check is a brute-force
midpoint sum over a dense grid, and the cycle check is a fixed-step
classical Runge-Kutta march with bisection for the threshold crossing.
Agreement between these and the adaptive code is what the tests lean on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ReactorConfig, UptakeKind


@dataclass(frozen=True)
class OracleSettings:
    """Grid densities for the brute-force checks.

    steps is the fixed-step count per unit time for the cycle march;
    riemann_points is the number of midpoint cells for the arc-gain sum.
    Both are floored at 1000 so the oracle stays meaningfully dense.
    """

    steps: float = 1e5
    riemann_points: int = 10 ** 6

    def __post_init__(self):
        if self.steps < 1e3:
            raise ValueError("steps must be at least 1e3 per unit time")
        if self.riemann_points < 10 ** 3:
            raise ValueError("riemann_points must be at least 1e3")


def _rates_on_grid(cfg: ReactorConfig, S: np.ndarray) -> np.ndarray:
    """Uptake rate at each row of S, vectorized by hand over the grid."""
    cols = []
    for i, p in enumerate(cfg.uptake.per_resource):
        si = np.maximum(S[:, i], 0.0)
        cols.append(p.mu_max * si / (p.k + si))
    per = np.column_stack(cols)
    if cfg.uptake.kind is UptakeKind.LIEBIG_MIN:
        return per.min(axis=1)
    return per.prod(axis=1)


def oracle_growth_integral(segment, settings: OracleSettings | None = None) -> float:
    """Midpoint-rule arc gain for a straight depletion segment.

    Accepts any object exposing s0 and cfg the way the geometry segment
    does. Error decays like 1/N^2, so the default grid is good to well
    below 1e-6 on smooth arcs.
    """
    settings = settings or OracleSettings()
    cfg = segment.cfg
    s0 = np.asarray(segment.s0, dtype=float)
    # biomass-units length of the arc: y1 * (s1_0 - s1_bar)
    drop = cfg.yields()[0] * (s0[0] - cfg.s1_bar)
    if drop <= 0.0:
        return 0.0
    n = int(settings.riemann_points)
    nu = (np.arange(n) + 0.5) / n
    S = s0[None, :] - np.outer(nu * drop, cfg.inverse_yields())
    S[:, 0] = s0[0] + nu * (cfg.s1_bar - s0[0])
    rates = _rates_on_grid(cfg, S)
    if np.any(rates <= 0.0):
        raise ValueError("arc left the positive-rate region; gain undefined")
    return drop * float(np.mean(1.0 - cfg.D / rates))


@dataclass(frozen=True)
class OracleCycle:
    index: int
    t_minus: float
    s_minus: tuple[float, ...]
    x_minus: float
    x_plus: float


@dataclass(frozen=True)
class OracleRun:
    cycles: list[OracleCycle]
    final_s: tuple[float, ...]
    final_x: float
    final_t: float


def _rhs_plain(cfg: ReactorConfig):
    consume = [float(v) for v in cfg.Y]
    params = [(p.mu_max, p.k) for p in cfg.uptake.per_resource]
    liebig = cfg.uptake.kind is UptakeKind.LIEBIG_MIN
    D = cfg.D
    n = cfg.n

    def rhs(z):
        rates = []
        for i in range(n):
            si = z[i] if z[i] > 0.0 else 0.0
            mu_max, k = params[i]
            rates.append(mu_max * si / (k + si))
        rate = min(rates) if liebig else math.prod(rates)
        out = [-(consume[i] * rate) * z[n] for i in range(n)]
        out.append((rate - D) * z[n])
        return out

    return rhs


def _rk4_step(rhs, z, h):
    k1 = rhs(z)
    k2 = rhs([zi + 0.5 * h * ki for zi, ki in zip(z, k1)])
    k3 = rhs([zi + 0.5 * h * ki for zi, ki in zip(z, k2)])
    k4 = rhs([zi + h * ki for zi, ki in zip(z, k3)])
    return [zi + (h / 6.0) * (a + 2.0 * b + 2.0 * c + d)
            for zi, a, b, c, d in zip(z, k1, k2, k3, k4)]


def oracle_run(cfg: ReactorConfig, s0, x0: float,
               settings: OracleSettings | None = None,
               max_cycles: int = 50, t_horizon: float = 1e4,
               washout: float = 1e-12) -> OracleRun:
    """Fixed-step march through up to max_cycles decant cycles.

    Steps at h = 1/steps; a step that lands below the threshold is
    re-taken at bisected fractions to pin the crossing down to roughly
    machine precision before the jump is applied. Stops early on biomass
    washout or the time horizon.
    """
    settings = settings or OracleSettings()
    rhs = _rhs_plain(cfg)
    h = 1.0 / settings.steps
    n = cfg.n
    z = [float(v) for v in s0] + [float(x0)]
    t = 0.0
    cycles: list[OracleCycle] = []

    while len(cycles) < max_cycles and t < t_horizon:
        if z[n] < washout:
            break
        znew = _rk4_step(rhs, z, h)
        if znew[0] > cfg.s1_bar:
            z = znew
            t += h
            continue
        # crossing inside this step: bisect the step fraction
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            zmid = _rk4_step(rhs, z, h * mid)
            if zmid[0] > cfg.s1_bar:
                lo = mid
            else:
                hi = mid
        frac = 0.5 * (lo + hi)
        zcross = _rk4_step(rhs, z, h * frac)
        t += h * frac
        x_minus = zcross[n]
        s_minus = tuple(zcross[:n])
        z = [cfg.r * cfg.s_in[i] + (1.0 - cfg.r) * zcross[i] for i in range(n)]
        z.append((1.0 - cfg.r) * x_minus)
        cycles.append(OracleCycle(
            index=len(cycles) + 1, t_minus=t, s_minus=s_minus,
            x_minus=x_minus, x_plus=z[n]))

    return OracleRun(cycles=cycles, final_s=tuple(z[:n]), final_x=z[n], final_t=t)
