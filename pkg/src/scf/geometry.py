"""Exact between-impulse geometry.

Between two impulses the resource state moves along a straight line: each
unit of resource 1 consumed fixes the consumption of every other resource
through the yields. Parameterizing an arc by the fraction nu of the
resource-1 headroom already consumed turns every cycle into the unit
interval and decouples the path (phi_nu) from the clock.

Along that line the biomass satisfies

    u_nu = x0 + y1 (s0_1 - s1_bar) * integral_0^nu (1 - D / F(phi_tau)) dtau

and the elapsed time of a full arc is

    T = y1 (s0_1 - s1_bar) * integral_0^1 dnu / (F(phi_nu) u_nu).

Every uptake component is nonincreasing along the arc, so F is
nonincreasing, the biomass prefix integral is concave in nu, and its
minimum over [0, 1] sits at an endpoint. Several routines lean on that.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ReactorConfig, UptakeKind, eval_F, uptake_components
from .quadrature import QuadratureSettings, integrate

# Liebig switch locations are refined to this tolerance in nu.
KINK_TOL = 1e-12


class SegmentLeavesRegionError(ValueError):
    """The arc would exhaust some resource before reaching the decant threshold.

    resource_index is 1-based, matching the numbering used everywhere a
    resource is named to the user.
    """

    def __init__(self, message: str, resource_index: int):
        super().__init__(message)
        self.resource_index = resource_index


class OrbitDiesBeforeImpulseError(ValueError):
    """The biomass functional hits zero before the arc completes."""


@dataclass(frozen=True)
class Segment:
    """A between-impulse arc, anchored at its fill state s0.

    s0 must start at or above the decant threshold in resource 1; callers
    that need the integrals to exist should confirm the arc stays positive
    (region membership) first.
    """

    s0: np.ndarray
    cfg: ReactorConfig

    def __init__(self, s0, cfg: ReactorConfig):
        arr = np.array(s0, dtype=float, copy=True)
        if arr.shape != (cfg.n,):
            raise ValueError(f"segment start has shape {arr.shape}, expected ({cfg.n},)")
        if arr[0] < cfg.s1_bar - 1e-10:
            raise ValueError(
                f"segment starts below the decant threshold: s1={arr[0]!r} < {cfg.s1_bar!r}")
        arr.flags.writeable = False
        object.__setattr__(self, "s0", arr)
        object.__setattr__(self, "cfg", cfg)

    def drop(self) -> float:
        """Total biomass-equivalent consumption of resource 1 on this arc."""
        y1 = 1.0 / self.cfg.Y[0]
        return y1 * (self.s0[0] - self.cfg.s1_bar)


def phi_nu(seg: Segment, nu: float) -> np.ndarray:
    """Resource concentrations after a fraction nu of the arc is consumed.

    Affine and nonincreasing in nu, componentwise. The first component is
    interpolated directly between s0_1 and the threshold so that nu=1 lands
    on the threshold exactly, with no roundoff residue.
    """
    if not 0.0 <= nu <= 1.0:
        raise ValueError(f"nu must lie in [0, 1], got {nu}")
    cfg = seg.cfg
    out = seg.s0 - (nu * seg.drop()) * cfg.inverse_yields()
    out[0] = seg.s0[0] + nu * (cfg.s1_bar - seg.s0[0])
    return out


def check_segment_interior(seg: Segment) -> None:
    """Fail unless the whole arc keeps every resource strictly positive.

    The arc is affine, so positivity at the far end (nu=1) is equivalent to
    positivity throughout. That far-end condition is also exactly what
    region membership means for the fill state.
    """
    end = phi_nu(seg, 1.0)
    worst = int(np.argmin(end))
    if end[worst] <= 0.0:
        raise SegmentLeavesRegionError(
            f"resource {worst + 1} would be exhausted before the decant threshold "
            f"(end concentration {end[worst]:.3e})", resource_index=worst + 1)


def _pair_crossings(seg: Segment, i: int, j: int, grid: np.ndarray, vals: np.ndarray) -> list[float]:
    """Roots of f_i - f_j along the arc, bracketed on the grid then refined.

    The difference of two Monod curves of affine arguments changes sign at
    most twice, so a modest grid cannot miss a bracket. Refinement is
    bisection with a secant shortcut, to KINK_TOL in nu.
    """
    def diff(nu: float) -> float:
        comp = uptake_components(seg.cfg, phi_nu(seg, nu))
        return comp[i] - comp[j]

    roots = []
    d = vals[:, i] - vals[:, j]
    for a_idx in range(len(grid) - 1):
        lo, hi = grid[a_idx], grid[a_idx + 1]
        dlo, dhi = d[a_idx], d[a_idx + 1]
        if dlo == 0.0:
            roots.append(lo)
            continue
        if dlo * dhi > 0.0:
            continue
        flo = dlo
        while hi - lo > KINK_TOL:
            mid = 0.5 * (lo + hi)
            fmid = diff(mid)
            # secant proposal, accepted only if it stays inside the bracket
            denom = fmid - flo
            if denom != 0.0:
                sec = mid - fmid * (mid - lo) / denom
                if lo < sec < hi:
                    fsec = diff(sec)
                    if flo * fsec <= 0.0:
                        hi = sec
                    else:
                        lo, flo = sec, fsec
                    continue
            if flo * fmid <= 0.0:
                hi = mid
            else:
                lo, flo = mid, fmid
        roots.append(0.5 * (lo + hi))
    return roots


def liebig_switch_points(seg: Segment, grid_points: int = 65) -> tuple[float, ...]:
    """nu values where the scarcest-resource index changes along the arc.

    Only meaningful for the minimum law; the product law has no switches.
    """
    cfg = seg.cfg
    if cfg.uptake.kind is not UptakeKind.LIEBIG_MIN or cfg.n == 1:
        return ()
    grid = np.linspace(0.0, 1.0, grid_points)
    vals = np.array([uptake_components(cfg, phi_nu(seg, nu)) for nu in grid])
    candidates: list[float] = []
    for i in range(cfg.n):
        for j in range(i + 1, cfg.n):
            candidates.extend(_pair_crossings(seg, i, j, grid, vals))
    switches = []
    eps = 1e-9
    for root in sorted(candidates):
        left = max(0.0, root - eps)
        right = min(1.0, root + eps)
        argmin_left = int(np.argmin(uptake_components(cfg, phi_nu(seg, left))))
        argmin_right = int(np.argmin(uptake_components(cfg, phi_nu(seg, right))))
        if argmin_left != argmin_right:
            if not switches or root - switches[-1] > 1e-10:
                switches.append(root)
    return tuple(switches)


def growth_integral(seg: Segment, q: QuadratureSettings | None = None) -> float:
    """Net biomass change over the whole arc, for a unit of biomass history.

    This is the quantity that decides survival: an arc with a negative
    value consumes more biomass through decay than growth replaces, and a
    start with x0 below its negation dies before the next impulse.
    """
    cfg = seg.cfg
    if seg.s0[0] <= cfg.s1_bar:
        return 0.0
    check_segment_interior(seg)

    def integrand(nu: float) -> float:
        return 1.0 - cfg.D / eval_F(cfg, phi_nu(seg, nu))

    kinks = liebig_switch_points(seg)
    return seg.drop() * integrate(integrand, 0.0, 1.0, q, breakpoints=kinks)


def s_hat_plus(cfg: ReactorConfig, r: float | None = None) -> np.ndarray:
    """Fill state of the once-per-cycle periodic orbit candidate.

    Found by sliding a fraction (1 - r) of the way down the arc that starts
    at the fresh-medium mix s_in; the decant jump maps the far end of this
    arc back onto it, which is what makes it periodic.
    """
    r_val = cfg.r if r is None else float(r)
    if not 0.0 <= r_val <= 1.0:
        raise ValueError(f"decant fraction must lie in [0, 1], got {r_val}")
    seg = Segment(cfg.s_in_array(), cfg)
    return phi_nu(seg, 1.0 - r_val)


def mu_of_r(cfg: ReactorConfig, r: float, q: QuadratureSettings | None = None) -> float:
    """Per-cycle biomass gain on the periodic-candidate arc, as a function of r.

    Zero at r=0 (no exchange means no arc), and positive exactly when the
    once-per-cycle orbit can sustain itself. The fill state's region
    membership is implied by the arc positivity check inside the integral.
    """
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"decant fraction must lie in [0, 1], got {r}")
    if r == 0.0:
        return 0.0
    return growth_integral(Segment(s_hat_plus(cfg, r), cfg), q)


def u_nu(seg: Segment, x0: float, nu: float, q: QuadratureSettings | None = None) -> float:
    """Biomass after a fraction nu of the arc, starting from x0."""
    if x0 <= 0.0:
        raise ValueError(f"biomass must be positive, got {x0}")
    if not 0.0 <= nu <= 1.0:
        raise ValueError(f"nu must lie in [0, 1], got {nu}")
    cfg = seg.cfg
    if seg.s0[0] <= cfg.s1_bar or nu == 0.0:
        return x0
    check_segment_interior(seg)

    def integrand(t: float) -> float:
        return 1.0 - cfg.D / eval_F(cfg, phi_nu(seg, t))

    kinks = [k for k in liebig_switch_points(seg) if k < nu]
    return x0 + seg.drop() * integrate(integrand, 0.0, nu, q, breakpoints=kinks)


def cycle_time(seg: Segment, x0: float, q: QuadratureSettings | None = None) -> float:
    """Wall-clock duration of the arc when started with biomass x0.

    More biomass eats the headroom faster, so the result is strictly
    decreasing in x0. Fails if the biomass functional would hit zero
    mid-arc; by concavity it suffices to check both endpoints.
    """
    if x0 <= 0.0:
        raise ValueError(f"biomass must be positive, got {x0}")
    cfg = seg.cfg
    if seg.s0[0] <= cfg.s1_bar:
        return 0.0
    check_segment_interior(seg)

    end_biomass = u_nu(seg, x0, 1.0, q)
    if end_biomass <= 0.0:
        raise OrbitDiesBeforeImpulseError(
            f"biomass would be exhausted before the decant threshold "
            f"(end biomass {end_biomass:.3e} from x0={x0})")

    drop = seg.drop()
    kinks = liebig_switch_points(seg)

    def growth_term(t: float) -> float:
        return 1.0 - cfg.D / eval_F(cfg, phi_nu(seg, t))

    def integrand(nu: float) -> float:
        partial = integrate(growth_term, 0.0, nu, q,
                            breakpoints=[k for k in kinks if k < nu])
        u_here = x0 + drop * partial
        if u_here <= 0.0:
            raise OrbitDiesBeforeImpulseError(
                f"biomass hit zero at arc fraction {nu:.6f}")
        return 1.0 / (eval_F(cfg, phi_nu(seg, nu)) * u_here)

    return drop * integrate(integrand, 0.0, 1.0, q, breakpoints=kinks)
