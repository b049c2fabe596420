import numpy as np
import pytest

from scf import (
    OrbitDiesBeforeImpulseError,
    Segment,
    SegmentLeavesRegionError,
    cycle_time,
    growth_integral,
    liebig_switch_points,
    lyapunov_v,
    mu_of_r,
    phi_nu,
    s_hat_plus,
    u_nu,
)
from scf.model import eval_F


def test_segment_shape_and_threshold_checks(ex3):
    with pytest.raises(ValueError):
        Segment(np.array([0.3, 0.01]), ex3)
    with pytest.raises(ValueError):
        Segment(np.array([0.2, 0.01, 1.0]), ex3)  # below the decant threshold


def test_drop_is_biomass_units_of_depletion(ex3):
    seg = Segment(np.array([0.3, 0.01, 1.0]), ex3)
    assert seg.drop() == pytest.approx(0.5 * (0.3 - 0.25), rel=1e-15)


def test_phi_endpoints_are_exact(ex3, probe_start):
    seg = Segment(probe_start, ex3)
    assert np.array_equal(phi_nu(seg, 0.0), probe_start)
    end = phi_nu(seg, 1.0)
    assert end[0] == ex3.s1_bar  # exact, not approximate


def test_phi_conserves_imbalance(ex3, probe_start):
    seg = Segment(probe_start, ex3)
    v0 = lyapunov_v(ex3, probe_start)
    for nu in (0.2, 0.5, 0.9, 1.0):
        assert np.allclose(lyapunov_v(ex3, phi_nu(seg, nu)), v0, atol=1e-14)


def test_interior_arc_positivity_raises_when_violated(ex1):
    # from this start the second resource runs out before the threshold
    seg = Segment(np.array([0.9, 0.2, 0.5]), ex1)
    with pytest.raises(SegmentLeavesRegionError) as info:
        growth_integral(seg)
    assert info.value.resource_index in (2, 3)


def test_growth_integral_zero_at_threshold_start(ex3):
    seg = Segment(np.array([0.25, 0.05, 0.5]), ex3)
    assert growth_integral(seg) == 0.0


def test_growth_integral_matches_midpoint_oracle(ex2, ex3):
    from scf import OracleSettings, oracle_growth_integral
    rng = np.random.default_rng(7)
    settings = OracleSettings(riemann_points=200_000)
    for cfg in (ex2, ex3):
        s_in = cfg.s_in_array()
        checked = 0
        while checked < 5:
            s = s_in * rng.uniform(0.5, 1.0, size=3)
            s[0] = cfg.s1_bar + (s_in[0] - cfg.s1_bar) * rng.uniform(0.1, 1.0)
            seg = Segment(s, cfg)
            try:
                fast = growth_integral(seg)
            except SegmentLeavesRegionError:
                continue
            slow = oracle_growth_integral(seg, settings)
            assert fast == pytest.approx(slow, abs=5e-8)
            checked += 1


def test_mu_r_edges(ex3):
    assert mu_of_r(ex3, 0.0) == 0.0
    with pytest.raises(ValueError):
        mu_of_r(ex3, -0.1)
    with pytest.raises(ValueError):
        mu_of_r(ex3, 1.1)


def test_mu_full_exchange_equals_full_arc_gain(ex3):
    full = growth_integral(Segment(ex3.s_in_array(), ex3))
    assert mu_of_r(ex3, 1.0) == pytest.approx(full, rel=1e-12)


def test_s_hat_plus_interpolates(ex3):
    shp = s_hat_plus(ex3)
    assert shp[0] == pytest.approx(ex3.r * ex3.s_in[0] + (1 - ex3.r) * ex3.s1_bar, abs=1e-15)
    assert np.allclose(lyapunov_v(ex3, shp), 0.0, atol=1e-15)


def test_liebig_switch_points_found():
    # crafted so the limiting resource flips along the arc: the second
    # resource limits at both ends with a window in between where the
    # first one does, so the minimum changes hands exactly twice
    from scf import MonodParams, ReactorConfig, UptakeLaw
    cfg = ReactorConfig(
        n=2, D=0.05, r=0.5, Y=(1.0, 1.0), s_in=(1.0, 1.0), s1_bar=0.1,
        uptake=UptakeLaw("liebig", (MonodParams(1.0, 0.5), MonodParams(0.6, 0.1))))
    seg = Segment(np.array([1.0, 0.9]), cfg)
    f1 = lambda nu: cfg.uptake.per_resource[0].rate(phi_nu(seg, nu)[0])
    f2 = lambda nu: cfg.uptake.per_resource[1].rate(phi_nu(seg, nu)[1])
    kinks = liebig_switch_points(seg)
    assert len(kinks) == 2
    for kink in kinks:
        assert f1(kink) == pytest.approx(f2(kink), abs=1e-9)
        # argmin really changes across the kink
        assert (f1(kink - 1e-3) < f2(kink - 1e-3)) != (f1(kink + 1e-3) < f2(kink + 1e-3))
    assert f2(0.0) < f1(0.0) and f2(1.0) < f1(1.0)
    mid = 0.5 * (kinks[0] + kinks[1])
    assert f1(mid) < f2(mid)


def test_no_switch_points_for_product_law(ex2):
    seg = Segment(ex2.s_in_array(), ex2)
    assert liebig_switch_points(seg) == ()


def test_u_profile_concave_minimum_at_endpoint(ex3, probe_start):
    seg = Segment(probe_start, ex3)
    x0 = 0.31
    nus = np.linspace(0.0, 1.0, 9)
    us = [u_nu(seg, x0, nu) for nu in nus]
    assert us[0] == pytest.approx(x0)
    assert min(us) == pytest.approx(min(us[0], us[-1]), rel=1e-9)


def test_cycle_time_matches_event_integration(ex3, probe_start):
    from scf import State, integrate_flow
    x0 = 0.31
    seg = Segment(probe_start, ex3)
    predicted = cycle_time(seg, x0)
    flow = integrate_flow(ex3, State(s=probe_start, x=x0, t=0.0))
    assert flow.reason == "threshold"
    assert predicted == pytest.approx(flow.state.t, rel=1e-7)


def test_cycle_time_detects_orbit_death(ex2):
    seg = Segment(ex2.s_in_array(), ex2)
    # the arc loses more biomass than this start carries
    with pytest.raises(OrbitDiesBeforeImpulseError):
        cycle_time(seg, 0.05)


def test_f_monotone_along_arc(ex2, ex3, probe_start):
    for cfg, start in ((ex2, ex2.s_in_array()), (ex3, probe_start)):
        seg = Segment(np.asarray(start, dtype=float), cfg)
        nus = np.linspace(0.0, 1.0, 50)
        vals = [eval_F(cfg, phi_nu(seg, nu)) for nu in nus]
        assert all(b <= a + 1e-13 for a, b in zip(vals, vals[1:]))
