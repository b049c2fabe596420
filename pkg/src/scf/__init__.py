"""Self-cycling fed-batch culture with several essential resources.

The library models a well-stirred culture that consumes its resources
until the first one is drawn down to a decant threshold, at which point a
fraction of the medium is instantly replaced with fresh feed. It offers
exact per-cycle quantities built on adaptive quadrature, an event-driven
impulsive integrator, a static classifier that predicts the long-run fate
of any start, slow brute-force oracles to check both, and a CLI that
writes delimited tables with figures alongside.
"""

from .classify import (
    AnalysisReport,
    RegionPreconditionError,
    RegionVerdict,
    RhoResult,
    VerdictResult,
    advance_fill_point,
    build_report,
    iterate_prefix_terms,
    least_integer_greater,
    lyapunov_v,
    n_bar,
    n_rho,
    periodic_biomass,
    r_star,
    region_of,
    rho,
    sigma,
    theorem_main_verdict,
    vbar,
    verify_impulse_scaling,
    x_threshold,
)
from .config_io import (
    ConfigFileError,
    apply_overrides,
    config_from_dict,
    config_to_dict,
    dump_config,
    fixture_path,
    load_config,
    load_config_with_overrides,
    load_fixture,
    parse_config,
)
from .geometry import (
    OrbitDiesBeforeImpulseError,
    Segment,
    SegmentLeavesRegionError,
    cycle_time,
    growth_integral,
    liebig_switch_points,
    mu_of_r,
    phi_nu,
    s_hat_plus,
    u_nu,
)
from .model import (
    ConfigViolation,
    ImpulseOffThresholdError,
    MonodParams,
    ReactorConfig,
    State,
    UptakeKind,
    UptakeLaw,
    eval_F,
    impulse_map,
    require_valid,
    uptake_components,
    validate_config,
)
from .oracle import OracleSettings, oracle_growth_integral, oracle_run
from .quadrature import QuadratureBudgetError, QuadratureSettings, integrate
from .simulate import (
    CycleRecord,
    FlowResult,
    IntegrationFailureError,
    IntegratorSettings,
    RunOutcome,
    RunResult,
    detect_outcome,
    integrate_flow,
    run,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisReport",
    "ConfigFileError",
    "ConfigViolation",
    "CycleRecord",
    "FlowResult",
    "ImpulseOffThresholdError",
    "IntegrationFailureError",
    "IntegratorSettings",
    "MonodParams",
    "OracleSettings",
    "OrbitDiesBeforeImpulseError",
    "QuadratureBudgetError",
    "QuadratureSettings",
    "ReactorConfig",
    "RegionPreconditionError",
    "RegionVerdict",
    "RhoResult",
    "RunOutcome",
    "RunResult",
    "Segment",
    "SegmentLeavesRegionError",
    "State",
    "UptakeKind",
    "UptakeLaw",
    "VerdictResult",
    "advance_fill_point",
    "apply_overrides",
    "build_report",
    "config_from_dict",
    "config_to_dict",
    "cycle_time",
    "detect_outcome",
    "dump_config",
    "eval_F",
    "fixture_path",
    "growth_integral",
    "impulse_map",
    "integrate",
    "integrate_flow",
    "iterate_prefix_terms",
    "least_integer_greater",
    "liebig_switch_points",
    "load_config",
    "load_config_with_overrides",
    "load_fixture",
    "lyapunov_v",
    "mu_of_r",
    "n_bar",
    "n_rho",
    "oracle_growth_integral",
    "oracle_run",
    "parse_config",
    "periodic_biomass",
    "phi_nu",
    "r_star",
    "region_of",
    "require_valid",
    "rho",
    "run",
    "s_hat_plus",
    "sigma",
    "theorem_main_verdict",
    "u_nu",
    "uptake_components",
    "validate_config",
    "vbar",
    "verify_impulse_scaling",
    "x_threshold",
    "__version__",
]
