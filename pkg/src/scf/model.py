"""Core parameter and state types for the self-cycling fermentor model.

A tank holds n essential resources with concentrations s and a biomass
concentration x. Between drain/refill events the state follows

    ds_i/dt = -(1/y_i) F(s) x        dx/dt = (F(s) - D) x

where F is the growth rate law and y_i the yield of biomass on resource i.
Whenever resource 1 is drawn down to the decant threshold, a fraction r of
the tank volume is replaced by fresh medium:

    s+ = r s_in + (1 - r) s-         x+ = (1 - r) x-

Everything in this module is immutable after construction and safe to share
across worker processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

# Absolute tolerance for "resource 1 sits on the decant threshold".
DEFAULT_EVENT_TOL = 1e-10


class UptakeKind(str, Enum):
    """How per-resource uptake rates combine into one growth rate."""

    LIEBIG_MIN = "liebig"
    PRODUCT = "product"


@dataclass(frozen=True)
class MonodParams:
    """Saturating uptake curve f(s) = mu_max * s / (k + s)."""

    mu_max: float
    k: float

    def rate(self, s: float) -> float:
        return self.mu_max * s / (self.k + s)


@dataclass(frozen=True)
class UptakeLaw:
    kind: UptakeKind
    per_resource: tuple[MonodParams, ...]

    def __init__(self, kind: UptakeKind | str, per_resource: Sequence[MonodParams]):
        object.__setattr__(self, "kind", UptakeKind(kind))
        object.__setattr__(self, "per_resource", tuple(per_resource))


@dataclass(frozen=True)
class ReactorConfig:
    """All model parameters.

    Y holds the inverse yields (Y_i = 1/y_i), exactly as they appear in
    config files; the yields y_i are derived. s1_bar is the decant
    threshold on resource 1 and must sit strictly below s_in[0].
    """

    n: int
    D: float
    r: float
    Y: tuple[float, ...]
    s_in: tuple[float, ...]
    s1_bar: float
    uptake: UptakeLaw

    def __init__(self, n, D, r, Y, s_in, s1_bar, uptake):
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "D", float(D))
        object.__setattr__(self, "r", float(r))
        object.__setattr__(self, "Y", tuple(float(v) for v in Y))
        object.__setattr__(self, "s_in", tuple(float(v) for v in s_in))
        object.__setattr__(self, "s1_bar", float(s1_bar))
        object.__setattr__(self, "uptake", uptake)

    def yields(self) -> np.ndarray:
        """Yield coefficients y_i = 1/Y_i."""
        return 1.0 / np.asarray(self.Y, dtype=float)

    def inverse_yields(self) -> np.ndarray:
        return np.asarray(self.Y, dtype=float)

    def s_in_array(self) -> np.ndarray:
        return np.asarray(self.s_in, dtype=float)


@dataclass(frozen=True)
class State:
    """Snapshot of the tank: concentrations, biomass, elapsed time."""

    s: np.ndarray
    x: float
    t: float = 0.0

    def __init__(self, s, x: float, t: float = 0.0):
        arr = np.array(s, dtype=float, copy=True)
        arr.flags.writeable = False
        object.__setattr__(self, "s", arr)
        object.__setattr__(self, "x", float(x))
        object.__setattr__(self, "t", float(t))


@dataclass(frozen=True)
class ConfigViolation:
    code: str
    message: str


class ImpulseOffThresholdError(ValueError):
    """Impulse requested at a state whose resource 1 is not on the threshold."""


def validate_config(cfg: ReactorConfig) -> list[ConfigViolation]:
    """Check every structural invariant; an empty list means the config is valid.

    Violations are returned as data rather than raised, so callers can
    report all of them at once.
    """
    out: list[ConfigViolation] = []
    if cfg.n < 1:
        out.append(ConfigViolation("n_not_positive", f"resource count must be >= 1, got {cfg.n}"))
    if not math.isfinite(cfg.D) or cfg.D < 0:
        out.append(ConfigViolation("decay_rate_negative", f"D must be finite and >= 0, got {cfg.D}"))
    if not (0.0 < cfg.r < 1.0):
        out.append(ConfigViolation("r_out_of_range", f"decant fraction r must lie in (0, 1), got {cfg.r}"))
    if len(cfg.Y) != cfg.n:
        out.append(ConfigViolation("y_length_mismatch", f"Y has {len(cfg.Y)} entries, expected n={cfg.n}"))
    if any(not math.isfinite(v) or v <= 0 for v in cfg.Y):
        out.append(ConfigViolation("y_not_positive", "every inverse yield Y_i must be finite and > 0"))
    if len(cfg.s_in) != cfg.n:
        out.append(ConfigViolation("s_in_length_mismatch", f"s_in has {len(cfg.s_in)} entries, expected n={cfg.n}"))
    if any(not math.isfinite(v) or v <= 0 for v in cfg.s_in):
        out.append(ConfigViolation("s_in_not_positive", "every input concentration must be finite and > 0"))
    if not math.isfinite(cfg.s1_bar) or cfg.s1_bar <= 0:
        out.append(ConfigViolation("threshold_not_positive", f"s1_bar must be > 0, got {cfg.s1_bar}"))
    elif cfg.s_in and cfg.s1_bar >= cfg.s_in[0]:
        # threshold at or above the feed level would trigger at every fill
        out.append(ConfigViolation(
            "threshold_above_input",
            f"s1_bar={cfg.s1_bar} must be strictly below s_in[0]={cfg.s_in[0]}"))
    if len(cfg.uptake.per_resource) != cfg.n:
        out.append(ConfigViolation(
            "uptake_length_mismatch",
            f"uptake law has {len(cfg.uptake.per_resource)} resource curves, expected n={cfg.n}"))
    for i, m in enumerate(cfg.uptake.per_resource):
        if not math.isfinite(m.mu_max) or m.mu_max <= 0:
            out.append(ConfigViolation("mu_max_not_positive", f"uptake.monod[{i}].mu_max must be > 0, got {m.mu_max}"))
        if not math.isfinite(m.k) or m.k <= 0:
            out.append(ConfigViolation("half_saturation_not_positive", f"uptake.monod[{i}].k must be > 0, got {m.k}"))
    return out


def require_valid(cfg: ReactorConfig) -> None:
    violations = validate_config(cfg)
    if violations:
        detail = "; ".join(f"{v.code}: {v.message}" for v in violations)
        raise ValueError(f"invalid reactor configuration: {detail}")


def uptake_components(cfg: ReactorConfig, s) -> np.ndarray:
    """Per-resource uptake rates f_i(s_i) as an array of length n."""
    s = np.asarray(s, dtype=float)
    if s.shape != (cfg.n,):
        raise ValueError(f"state has shape {s.shape}, expected ({cfg.n},)")
    out = np.empty(cfg.n)
    for i, m in enumerate(cfg.uptake.per_resource):
        out[i] = m.mu_max * s[i] / (m.k + s[i])
    return out


def eval_F(cfg: ReactorConfig, s) -> float:
    """Growth rate at concentrations s.

    Liebig uptake takes the scarcest resource's rate, product uptake the
    product of all rates. Either way the result vanishes exactly when some
    resource is exhausted and increases in every coordinate on the interior.
    """
    comp = uptake_components(cfg, s)
    if cfg.uptake.kind is UptakeKind.LIEBIG_MIN:
        return float(comp.min())
    return float(comp.prod())


def impulse_map(cfg: ReactorConfig, pre: State, event_tol: float = DEFAULT_EVENT_TOL) -> State:
    """Apply the drain/refill jump to a state sitting on the decant threshold.

    A fraction r of the tank is replaced by fresh medium, so concentrations
    mix toward s_in and biomass is diluted by (1 - r). Time does not
    advance; the jump is instantaneous.
    """
    if abs(pre.s[0] - cfg.s1_bar) > event_tol:
        raise ImpulseOffThresholdError(
            f"impulse requested at s1={pre.s[0]!r}, but the decant threshold is "
            f"{cfg.s1_bar!r} (tolerance {event_tol:g})")
    s_plus = cfg.r * cfg.s_in_array() + (1.0 - cfg.r) * pre.s
    return State(s=s_plus, x=(1.0 - cfg.r) * pre.x, t=pre.t)


def lipschitz_bound(cfg: ReactorConfig) -> float:
    """An upper bound on the Lipschitz constant of F in the sup norm.

    Each Monod curve has slope at most mu_max/k (steepest at s=0). For the
    minimum law the bound is the largest single slope; for the product law,
    bound each partial derivative by that slope times the other factors'
    suprema mu_max.
    """
    slopes = [m.mu_max / m.k for m in cfg.uptake.per_resource]
    if cfg.uptake.kind is UptakeKind.LIEBIG_MIN:
        return max(slopes)
    total = 0.0
    for i, m in enumerate(cfg.uptake.per_resource):
        others = 1.0
        for j, mj in enumerate(cfg.uptake.per_resource):
            if j != i:
                others *= mj.mu_max
        total += slopes[i] * others
    return total
