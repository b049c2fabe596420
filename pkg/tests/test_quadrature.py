import math

import numpy as np
import pytest

from scf import QuadratureBudgetError, QuadratureSettings, integrate
from scf.quadrature import _NODES, _WEIGHTS_G, _WEIGHTS_K, _rule


def test_weights_sum_to_two():
    assert math.fsum(_WEIGHTS_K) == pytest.approx(2.0, abs=1e-14)
    assert math.fsum(_WEIGHTS_G) == pytest.approx(2.0, abs=1e-13)


@pytest.mark.parametrize("degree", range(0, 23))
def test_kronrod_rule_is_exact_through_degree_22(degree):
    # odd powers vanish by symmetry; exact value of x^d over [-1, 1]
    exact = 0.0 if degree % 2 else 2.0 / (degree + 1)
    val = math.fsum(w * x ** degree for x, w in zip(_NODES, _WEIGHTS_K))
    assert val == pytest.approx(exact, abs=5e-14)


@pytest.mark.parametrize("degree", range(0, 14))
def test_gauss_rule_is_exact_through_degree_13(degree):
    exact = 0.0 if degree % 2 else 2.0 / (degree + 1)
    val = math.fsum(w * x ** degree for x, w in zip(_NODES, _WEIGHTS_G))
    assert val == pytest.approx(exact, abs=5e-15)


def test_gauss_nodes_match_legendre_roots():
    gauss_nodes = sorted(x for x, w in zip(_NODES, _WEIGHTS_G) if w)
    ref_nodes, _ = np.polynomial.legendre.leggauss(7)
    assert np.allclose(gauss_nodes, sorted(ref_nodes), atol=1e-14)


def test_single_rule_reports_error():
    val, err = _rule(math.sin, 0.0, math.pi)
    assert val == pytest.approx(2.0, abs=1e-10)
    assert err >= 0.0


@pytest.mark.parametrize("f,a,b,exact", [
    (math.sin, 0.0, math.pi, 2.0),
    (lambda x: math.exp(-x), 0.0, 50.0, 1.0 - math.exp(-50.0)),
    (lambda x: 1.0 / math.sqrt(x), 1e-10, 1.0, 2.0 * (1.0 - 1e-5)),
    (lambda x: x ** 3 - 2 * x, -1.0, 3.0, (81 / 4 - 9) - (1 / 4 - 1)),
])
def test_known_integrals(f, a, b, exact):
    assert integrate(f, a, b) == pytest.approx(exact, rel=1e-7, abs=1e-9)


def test_kink_with_breakpoint_hint():
    f = lambda x: abs(x - 1.0 / 3.0)
    exact = (1.0 / 3.0) ** 2 / 2 + (2.0 / 3.0) ** 2 / 2
    assert integrate(f, 0.0, 1.0, breakpoints=(1.0 / 3.0,)) == pytest.approx(exact, abs=1e-12)


def test_breakpoints_outside_range_ignored():
    assert integrate(math.sin, 0.0, 1.0, breakpoints=(-5.0, 7.0)) == pytest.approx(
        1.0 - math.cos(1.0), abs=1e-12)


def test_zero_width_interval():
    assert integrate(math.sin, 2.0, 2.0) == 0.0


def test_inverted_interval_rejected():
    with pytest.raises(ValueError):
        integrate(math.sin, 1.0, 0.0)


def test_non_finite_integrand_rejected():
    with pytest.raises(ValueError, match="non-finite"):
        integrate(lambda x: math.nan if x > 0.5 else 1.0, 0.0, 1.0)


def test_budget_error_carries_partial_estimate():
    settings = QuadratureSettings(max_subdivisions=3)
    f = lambda x: math.sin(1000.0 * x)
    with pytest.raises(QuadratureBudgetError) as info:
        integrate(f, 0.0, 1.0, settings)
    assert info.value.subdivisions == 4
    assert math.isfinite(info.value.estimate)
    assert info.value.error_estimate > 0.0


def test_results_are_deterministic():
    f = lambda x: math.sin(37.0 * x) / (1.0 + x * x)
    a = integrate(f, 0.0, 4.0)
    b = integrate(f, 0.0, 4.0)
    assert a == b


def test_settings_validation():
    with pytest.raises(ValueError):
        QuadratureSettings(abs_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureSettings(max_subdivisions=0)


def test_steep_boundary_layer_converges():
    # a near-singular tail like the edge probes produce
    eps = 1e-7
    f = lambda x: 1.0 / (1.0 - x + eps)
    exact = math.log((1.0 + eps) / eps)
    assert integrate(f, 0.0, 1.0) == pytest.approx(exact, rel=1e-7)
