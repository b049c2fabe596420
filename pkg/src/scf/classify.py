"""Static classification of long-run behavior.

The flow conserves, per resource i >= 2, the signed imbalance

    V_i(s) = (s1_in - s1) y1 - (si_in - si) yi

between resource 1 and resource i, measured in biomass units. An impulse
contracts every V_i by the factor (1 - r), so over many cycles the
imbalance vector decays geometrically toward the balance of fresh medium.

Whether the decant threshold is reachable with all resources positive is a
pure comparison of V_i against the constants

    vbar_i = y1 (s1_in - s1_bar) - yi si_in:

strictly above for every i means the threshold is reachable (tag Omega1),
strictly below for some i means it is not (tag Omega0). Everything else in
this module builds on that partition: the per-cycle gain mu(r), the
critical decant fraction r_star, the safety margin rho with its cycle
bounds n_rho and n_bar, and the minimum viable starting biomass
x_threshold. theorem_main_verdict assembles them into a single tag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    Segment,
    growth_integral,
    mu_of_r,
    phi_nu,
    s_hat_plus,
)
from .model import ReactorConfig, State, impulse_map, require_valid
from .quadrature import QuadratureSettings

# |mu| below this is treated as exactly zero: the sustainable and the
# decaying case are numerically indistinguishable there.
MU_MARGINAL_TOL = 1e-9

# region boundary tolerance, relative to the largest |vbar_i|
BOUNDARY_REL_TOL = 1e-12

REGION_OMEGA0 = "Omega0"
REGION_OMEGA1 = "Omega1"
REGION_BOUNDARY = "BoundaryOmega1"

VERDICT_FAIL_OMEGA0 = "FailOmega0"
VERDICT_FAIL_NONPOSITIVE_MU = "FailNonpositiveMu"
VERDICT_MARGINAL_MU = "MarginalMu"
VERDICT_CONVERGES = "ConvergesToPeriodic"
VERDICT_FAILS_FINITELY = "FailsAfterFinitelyManyCycles"
VERDICT_MARGINAL = "Marginal"


class RegionPreconditionError(ValueError):
    """An operation needed the input mix inside the cycling region and it was not."""


@dataclass(frozen=True)
class RegionVerdict:
    region: str
    witness_index: int
    witness_value: float


@dataclass(frozen=True)
class RhoResult:
    value: float
    at_sigma: bool


@dataclass(frozen=True)
class VerdictResult:
    tag: str
    region_of_input: RegionVerdict
    region_of_s0: RegionVerdict | None
    mu_r: float | None
    x_threshold: float | None
    periodic_x_post: float | None
    periodic_x_pre: float | None


def lyapunov_v(cfg: ReactorConfig, s) -> np.ndarray:
    """The conserved imbalance vector V(s); the first entry is identically 0."""
    s = np.asarray(s, dtype=float)
    if s.shape != (cfg.n,):
        raise ValueError(f"state has shape {s.shape}, expected ({cfg.n},)")
    y = cfg.yields()
    s_in = cfg.s_in_array()
    v = (s_in[0] - s[0]) * y[0] - (s_in - s) * y
    v[0] = 0.0
    return v


def vbar(cfg: ReactorConfig) -> np.ndarray:
    """Region thresholds for V, one per resource; entry 1 is not part of the
    partition and is reported as NaN."""
    y = cfg.yields()
    s_in = cfg.s_in_array()
    out = y[0] * (s_in[0] - cfg.s1_bar) - y * s_in
    out[0] = math.nan
    return out


def _boundary_tol(vb: np.ndarray) -> float:
    scale = float(np.nanmax(np.abs(vb))) if vb.size > 1 else 0.0
    if not math.isfinite(scale) or scale == 0.0:
        scale = 1.0
    return BOUNDARY_REL_TOL * scale


def region_of(cfg: ReactorConfig, s) -> RegionVerdict:
    """Classify a pre-impulse state by whether the threshold is reachable.

    States below the decant threshold in resource 1 are rejected: the flow
    never visits them between impulses.
    """
    s = np.asarray(s, dtype=float)
    if s[0] < cfg.s1_bar - 1e-10:
        raise ValueError(
            f"state with s1={s[0]!r} sits below the decant threshold {cfg.s1_bar!r}")
    vb = vbar(cfg)
    v = lyapunov_v(cfg, s)
    tol = _boundary_tol(vb)
    margins = v[1:] - vb[1:]
    worst = int(np.argmin(margins))
    if margins[worst] < -tol:
        return RegionVerdict(REGION_OMEGA0, witness_index=worst + 1, witness_value=float(v[worst + 1]))
    if margins[worst] > tol:
        return RegionVerdict(REGION_OMEGA1, witness_index=worst + 1, witness_value=float(v[worst + 1]))
    return RegionVerdict(REGION_BOUNDARY, witness_index=worst + 1, witness_value=float(v[worst + 1]))


def _require_input_in_region(cfg: ReactorConfig) -> np.ndarray:
    vb = vbar(cfg)
    verdict = region_of(cfg, cfg.s_in_array())
    if verdict.region != REGION_OMEGA1:
        raise RegionPreconditionError(
            f"the input mix cannot sustain cycling: region is {verdict.region} "
            f"(witness resource {verdict.witness_index})")
    return vb


def sigma(cfg: ReactorConfig) -> float:
    """Smallest distance from balance to any region threshold; the headroom
    available for the safety margin rho."""
    vb = _require_input_in_region(cfg)
    return float(np.min(-vb[1:]))


def _shifted_fill_point(cfg: ReactorConfig, z: float) -> np.ndarray:
    """The periodic fill state pushed z biomass-units toward every threshold.

    Every imbalance entry of the result equals -z, so z sweeps a ray that
    exits the cycling region exactly at z = sigma.
    """
    base = s_hat_plus(cfg)
    shift = z * cfg.inverse_yields()
    shift[0] = 0.0
    return base - shift


def rho(cfg: ReactorConfig, q: QuadratureSettings | None = None) -> RhoResult:
    """Largest imbalance depth whose arcs still gain biomass.

    Found as the zero of z -> gain(shifted fill point(z)) on (0, sigma) by
    bisection to 1e-9. The gain is checked to decrease monotonically along
    the probes; if it stays positive all the way to sigma, rho equals sigma
    and the result says so.
    """
    sig = sigma(cfg)
    mu = mu_of_r(cfg, cfg.r, q)
    if mu <= 0.0:
        raise RegionPreconditionError(
            f"the safety margin exists only when the per-cycle gain is positive (mu={mu:.3e})")

    probes: list[tuple[float, float]] = [(0.0, mu)]

    def gain(z: float) -> float:
        value = growth_integral(Segment(_shifted_fill_point(cfg, z), cfg), q)
        probes.append((z, value))
        return value

    # probe just inside the far end; if still positive, there is no interior zero
    z_edge = sig * (1.0 - 1e-6)
    if gain(z_edge) >= 0.0:
        _assert_monotone(probes)
        return RhoResult(value=sig, at_sigma=True)

    lo, hi = 0.0, z_edge
    while hi - lo > 1e-9:
        mid = 0.5 * (lo + hi)
        if gain(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    _assert_monotone(probes)
    return RhoResult(value=0.5 * (lo + hi), at_sigma=False)


def _assert_monotone(probes: list[tuple[float, float]]) -> None:
    # quadrature noise allowance; the decrease should dwarf it
    slack = 1e-8
    ordered = sorted(probes)
    for (z_a, g_a), (z_b, g_b) in zip(ordered, ordered[1:]):
        if g_b > g_a + slack:
            raise RuntimeError(
                f"per-arc gain failed to decrease with imbalance depth: "
                f"gain({z_a:.6g})={g_a:.6g} but gain({z_b:.6g})={g_b:.6g}")


def r_star(cfg: ReactorConfig, q: QuadratureSettings | None = None) -> float | None:
    """Critical decant fraction: gain is nonpositive on [0, r_star], positive above.

    None when even a full exchange cannot achieve positive gain.
    """
    _require_input_in_region(cfg)
    if mu_of_r(cfg, 1.0, q) <= 0.0:
        return None
    lo, hi = 0.0, 1.0  # mu(0) = 0, mu(1) > 0
    while hi - lo > 1e-6:
        mid = 0.5 * (lo + hi)
        if mu_of_r(cfg, mid, q) > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def least_integer_greater(x: float) -> int:
    """Smallest integer strictly greater than x.

    Deliberately not the conventional ceiling: integer inputs round up,
    so least_integer_greater(2.0) == 3.
    """
    return math.floor(x) + 1


def n_rho(cfg: ReactorConfig, s0, rho_value: float) -> int:
    """Cycles needed before every imbalance entry has contracted to within rho.

    Each impulse multiplies V by (1 - r); entries already inside the margin
    contribute nothing, and an empty set of offenders means one cycle
    suffices by convention.
    """
    if rho_value <= 0.0:
        raise ValueError(f"the margin must be positive, got {rho_value}")
    verdict = region_of(cfg, s0)
    if verdict.region != REGION_OMEGA1:
        raise RegionPreconditionError(
            f"cycle bounds are defined only inside the cycling region, got {verdict.region}")
    v = lyapunov_v(cfg, s0)
    shrink = -math.log(1.0 - cfg.r)
    bounds = [
        least_integer_greater(math.log(v[i] / -rho_value) / shrink)
        for i in range(1, cfg.n)
        if v[i] <= -rho_value
    ]
    return max(bounds) if bounds else 1


def n_bar(cfg: ReactorConfig, rho_value: float) -> int:
    """Worst-case cycle bound over the whole cycling region."""
    if rho_value <= 0.0:
        raise ValueError(f"the margin must be positive, got {rho_value}")
    vb = _require_input_in_region(cfg)
    shrink = -math.log(1.0 - cfg.r)
    return max(
        least_integer_greater(math.log(vb[i] / -rho_value) / shrink)
        for i in range(1, cfg.n)
    )


def advance_fill_point(cfg: ReactorConfig, s) -> np.ndarray:
    """One whole cycle of the fill-state map: ride the arc down to the
    threshold, then apply the decant jump."""
    end = phi_nu(Segment(np.asarray(s, dtype=float), cfg), 1.0)
    return cfg.r * cfg.s_in_array() + (1.0 - cfg.r) * end


def iterate_prefix_terms(cfg: ReactorConfig, s0, count: int,
                         q: QuadratureSettings | None = None) -> list[float]:
    """Discounted per-arc gains along the fill-state orbit from s0.

    Term k is (1-r)^(1-k) times the gain of arc k; partial sums of these
    track the worst biomass drawdown across the first k cycles.
    """
    terms = []
    s = np.asarray(s0, dtype=float)
    scale = 1.0
    for _ in range(count):
        terms.append(scale * growth_integral(Segment(s, cfg), q))
        s = advance_fill_point(cfg, s)
        scale /= (1.0 - cfg.r)
    return terms


def x_threshold(cfg: ReactorConfig, s0, q: QuadratureSettings | None = None) -> float:
    """Minimum starting biomass that survives every early drawdown from s0.

    The deepest partial sum of the discounted gains over the first n_rho
    cycles, negated. Negative means any positive start survives.
    """
    rr = rho(cfg, q)
    horizon = n_rho(cfg, s0, rr.value)
    terms = iterate_prefix_terms(cfg, s0, horizon, q)
    prefix = np.cumsum(terms)
    return float(-prefix.min())


def periodic_biomass(cfg: ReactorConfig, mu: float) -> tuple[float, float]:
    """Post- and pre-impulse biomass of the once-per-cycle orbit with gain mu."""
    post = (1.0 - cfg.r) * mu / cfg.r
    return post, post / (1.0 - cfg.r)


def theorem_main_verdict(cfg: ReactorConfig, s0, x0: float,
                         q: QuadratureSettings | None = None) -> VerdictResult:
    """Full long-run classification for a start (s0, x0).

    Cases, checked in order: the input mix cannot cycle at all; the
    exchange fraction is too small for positive gain (or exactly
    marginal); the start itself is outside the cycling region or cannot
    afford the early drawdown; otherwise the run converges to the unique
    once-per-cycle orbit. Starts sitting exactly on a deciding boundary
    come back Marginal rather than being forced into either side.
    """
    require_valid(cfg)
    s0 = np.asarray(s0, dtype=float)
    if x0 <= 0.0:
        raise ValueError(f"starting biomass must be positive, got {x0}")

    region_in = region_of(cfg, cfg.s_in_array())
    if region_in.region == REGION_OMEGA0:
        return VerdictResult(
            tag=VERDICT_FAIL_OMEGA0, region_of_input=region_in, region_of_s0=None,
            mu_r=None, x_threshold=None, periodic_x_post=None, periodic_x_pre=None)
    if region_in.region == REGION_BOUNDARY:
        return VerdictResult(
            tag=VERDICT_MARGINAL, region_of_input=region_in, region_of_s0=None,
            mu_r=None, x_threshold=None, periodic_x_post=None, periodic_x_pre=None)

    mu = mu_of_r(cfg, cfg.r, q)
    if abs(mu) < MU_MARGINAL_TOL:
        return VerdictResult(
            tag=VERDICT_MARGINAL_MU, region_of_input=region_in, region_of_s0=None,
            mu_r=mu, x_threshold=None, periodic_x_post=None, periodic_x_pre=None)
    if mu < 0.0:
        return VerdictResult(
            tag=VERDICT_FAIL_NONPOSITIVE_MU, region_of_input=region_in, region_of_s0=None,
            mu_r=mu, x_threshold=None, periodic_x_post=None, periodic_x_pre=None)

    post, pre = periodic_biomass(cfg, mu)
    region_s0 = region_of(cfg, s0)
    if region_s0.region == REGION_OMEGA0:
        return VerdictResult(
            tag=VERDICT_FAILS_FINITELY, region_of_input=region_in, region_of_s0=region_s0,
            mu_r=mu, x_threshold=None, periodic_x_post=post, periodic_x_pre=pre)
    if region_s0.region == REGION_BOUNDARY:
        return VerdictResult(
            tag=VERDICT_MARGINAL, region_of_input=region_in, region_of_s0=region_s0,
            mu_r=mu, x_threshold=None, periodic_x_post=post, periodic_x_pre=pre)

    threshold = x_threshold(cfg, s0, q)
    if abs(x0 - threshold) <= 1e-9 * max(1.0, abs(threshold)):
        tag = VERDICT_MARGINAL
    elif x0 > threshold:
        tag = VERDICT_CONVERGES
    else:
        tag = VERDICT_FAILS_FINITELY
    return VerdictResult(
        tag=tag, region_of_input=region_in, region_of_s0=region_s0,
        mu_r=mu, x_threshold=threshold, periodic_x_post=post, periodic_x_pre=pre)


@dataclass(frozen=True)
class AnalysisReport:
    """Everything the static analysis can say about a config and a start.

    Fields that require a positive per-cycle gain (rho and its dependents)
    are None when the gain is nonpositive or the input mix cannot cycle.
    """

    vbar: tuple[float, ...]
    region_of_input: RegionVerdict
    mu_r: float | None
    r_star: float | None
    sigma: float | None
    rho: float | None
    rho_at_sigma: bool
    s_hat_plus: tuple[float, ...]
    periodic_x_post: float | None
    periodic_x_pre: float | None
    n_rho: int | None
    n_bar: int | None
    x_threshold: float | None
    verdict: str


def build_report(cfg: ReactorConfig, s0=None, x0: float | None = None,
                 q: QuadratureSettings | None = None) -> AnalysisReport:
    """Assemble the full report for a start (s0 defaults to the input mix).

    Without x0 the verdict is still decided whenever the biomass threshold
    is negative (every positive start behaves the same); otherwise the
    caller must supply x0 and a ValueError says so.
    """
    require_valid(cfg)
    s0_arr = cfg.s_in_array() if s0 is None else np.asarray(s0, dtype=float)
    vb = vbar(cfg)
    region_in = region_of(cfg, cfg.s_in_array())
    shp = s_hat_plus(cfg)

    mu = rstar = sig = None
    rho_res = None
    nr = nb = thresh = None
    post = pre = None
    if region_in.region == REGION_OMEGA1:
        mu = mu_of_r(cfg, cfg.r, q)
        rstar = r_star(cfg, q)
        sig = sigma(cfg)
        if mu > MU_MARGINAL_TOL:
            post, pre = periodic_biomass(cfg, mu)
            rho_res = rho(cfg, q)
            nb = n_bar(cfg, rho_res.value)
            if region_of(cfg, s0_arr).region == REGION_OMEGA1:
                nr = n_rho(cfg, s0_arr, rho_res.value)
                thresh = x_threshold(cfg, s0_arr, q)

    if x0 is not None:
        verdict = theorem_main_verdict(cfg, s0_arr, x0, q).tag
    else:
        verdict = _verdict_without_biomass(cfg, s0_arr, region_in, mu, thresh)

    return AnalysisReport(
        vbar=tuple(float(v) for v in vb),
        region_of_input=region_in,
        mu_r=mu,
        r_star=rstar,
        sigma=sig,
        rho=None if rho_res is None else rho_res.value,
        rho_at_sigma=bool(rho_res.at_sigma) if rho_res is not None else False,
        s_hat_plus=tuple(float(v) for v in shp),
        periodic_x_post=post,
        periodic_x_pre=pre,
        n_rho=nr,
        n_bar=nb,
        x_threshold=thresh,
        verdict=verdict,
    )


def _verdict_without_biomass(cfg, s0_arr, region_in, mu, thresh) -> str:
    if region_in.region == REGION_OMEGA0:
        return VERDICT_FAIL_OMEGA0
    if region_in.region == REGION_BOUNDARY:
        return VERDICT_MARGINAL
    if abs(mu) < MU_MARGINAL_TOL:
        return VERDICT_MARGINAL_MU
    if mu < 0.0:
        return VERDICT_FAIL_NONPOSITIVE_MU
    region_s0 = region_of(cfg, s0_arr)
    if region_s0.region == REGION_OMEGA0:
        return VERDICT_FAILS_FINITELY
    if region_s0.region == REGION_BOUNDARY:
        return VERDICT_MARGINAL
    if thresh is not None and thresh < -MU_MARGINAL_TOL:
        return VERDICT_CONVERGES
    raise ValueError(
        "the verdict depends on the starting biomass here (the threshold is "
        "nonnegative); provide x0")


def verify_impulse_scaling(cfg: ReactorConfig, pre: State) -> tuple[np.ndarray, np.ndarray]:
    """Imbalance vectors before and after one impulse; the after equals
    (1 - r) times the before, up to float roundoff. Exposed for tests."""
    before = lyapunov_v(cfg, pre.s)
    after = lyapunov_v(cfg, impulse_map(cfg, pre).s)
    return before, after
