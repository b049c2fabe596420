import numpy as np
import pytest

import scf
from scf import OracleSettings, Segment, oracle_growth_integral, oracle_run


def test_settings_floors():
    with pytest.raises(ValueError):
        OracleSettings(steps=100)
    with pytest.raises(ValueError):
        OracleSettings(riemann_points=10)


def test_midpoint_sum_matches_quadrature(ex3, probe_start):
    seg = Segment(probe_start, ex3)
    slow = oracle_growth_integral(seg, OracleSettings(riemann_points=500_000))
    fast = scf.growth_integral(seg)
    assert slow == pytest.approx(fast, abs=1e-8)


def test_midpoint_sum_product_law(ex2):
    seg = Segment(ex2.s_in_array(), ex2)
    slow = oracle_growth_integral(seg, OracleSettings(riemann_points=500_000))
    assert slow == pytest.approx(scf.growth_integral(seg), abs=1e-8)


def test_midpoint_sum_zero_length_arc(ex3):
    seg = Segment(np.array([ex3.s1_bar, 0.05, 0.5]), ex3)
    assert oracle_growth_integral(seg) == 0.0


def test_midpoint_sum_rejects_arc_leaving_region(ex1):
    seg = Segment(np.array([0.9, 0.2, 0.5]), ex1)
    with pytest.raises(ValueError):
        oracle_growth_integral(seg, OracleSettings(riemann_points=10_000))


def test_fixed_step_march_matches_event_integrator(ex3):
    # a short start keeps the fixed-step march cheap
    s0 = (0.26, 0.02, 0.8)
    x0 = 0.4
    adaptive = scf.run(ex3, s0, x0)
    horizon = adaptive.cycles[2].t_minus * 1.2
    marched = oracle_run(ex3, s0, x0, OracleSettings(steps=2e3),
                         max_cycles=3, t_horizon=horizon)
    assert len(marched.cycles) == 3
    for k in range(3):
        a = marched.cycles[k].x_minus
        b = adaptive.cycles[k].state_minus.x
        assert a == pytest.approx(b, rel=1e-5)
        assert marched.cycles[k].t_minus == pytest.approx(
            adaptive.cycles[k].t_minus, rel=1e-5)
        assert marched.cycles[k].x_plus == pytest.approx(
            (1 - ex3.r) * a, rel=1e-12)


def test_fixed_step_march_stops_on_washout(ex2):
    marched = oracle_run(ex2, (0.45, 0.02, 0.02), 1e-11,
                         OracleSettings(steps=1e3), max_cycles=5, t_horizon=50.0)
    assert marched.cycles == []
    assert marched.final_x < 1e-11


def test_fixed_step_march_respects_horizon(ex3):
    marched = oracle_run(ex3, (0.48, 0.09, 0.48), 0.001,
                         OracleSettings(steps=1e3), max_cycles=5, t_horizon=0.5)
    assert marched.final_t <= 0.5 + 1e-3
    assert marched.cycles == []
