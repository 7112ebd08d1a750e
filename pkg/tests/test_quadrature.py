import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wfdensity.errors import InvalidArgumentError
from wfdensity.quadrature import (cumtrapz_from_anchor, jacobi_rule_01,
                                  jacobi_singular_integral, laguerre_expectation,
                                  laguerre_rule, shifted_combination, trapezoid,
                                  trapezoid_weights, uniform_grid)


def test_uniform_grid_endpoints():
    g = uniform_grid(1.0, 2)
    assert np.array_equal(g.points, [0.0, 1.0])


def test_uniform_grid_five_points():
    g = uniform_grid(1.0, 5)
    assert np.allclose(g.points, [0.0, 0.25, 0.5, 0.75, 1.0])


def test_uniform_grid_spacing():
    g = uniform_grid(2.0, 3)
    assert np.allclose(g.points, [0.0, 1.0, 2.0])


@pytest.mark.parametrize("T,n", [(-1.0, 5), (0.0, 5), (1.0, 1), (1.0, 0)])
def test_uniform_grid_rejects_bad_args(T, n):
    with pytest.raises(InvalidArgumentError):
        uniform_grid(T, n)


def test_trapezoid_constant():
    g = uniform_grid(1.0, 11)
    assert trapezoid(np.ones(11), g) == pytest.approx(1.0, abs=1e-15)


def test_trapezoid_linear_exact():
    g = uniform_grid(1.0, 101)
    assert trapezoid(g.points, g) == pytest.approx(0.5, abs=1e-15)


def test_trapezoid_quadratic():
    # oracle: analytic antiderivative x^3/3 on [0,1]
    g = uniform_grid(1.0, 101)
    assert trapezoid(g.points ** 2, g) == pytest.approx(1.0 / 3.0, abs=1e-4)


def test_trapezoid_length_mismatch():
    g = uniform_grid(1.0, 11)
    with pytest.raises(InvalidArgumentError):
        trapezoid(np.ones(10), g)


@given(st.floats(-10, 10), st.floats(-10, 10),
       st.lists(st.floats(0.01, 1.0), min_size=1, max_size=30),
       st.floats(0.1, 5.0))
@settings(max_examples=50, deadline=None)
def test_trapezoid_linearity_on_linear_integrands(a, b, gaps, T):
    # exact to machine precision for a*x + b on any grid, uniform or not
    pts = np.concatenate([[0.0], np.cumsum(gaps)])
    from wfdensity.quadrature import TimeGrid
    g = TimeGrid(pts)
    vals = a * g.points + b
    exact = a * g.T ** 2 / 2 + b * g.T
    assert trapezoid(vals, g) == pytest.approx(exact, rel=1e-12, abs=1e-10)


def test_trapezoid_weights_match_rule():
    g = uniform_grid(2.0, 17)
    vals = np.sin(g.points)
    assert np.sum(trapezoid_weights(g) * vals) == pytest.approx(trapezoid(vals, g))


def test_cumtrapz_anchor_both_directions():
    x = np.linspace(-2.0, 2.0, 81)
    i0 = 40
    out = cumtrapz_from_anchor(x, x, i0)  # int_0^x z dz = x^2/2
    assert out[i0] == 0.0
    assert np.allclose(out, x ** 2 / 2, atol=1e-12)


def test_laguerre_constant_exact():
    assert laguerre_expectation(lambda u: 1.0, 32) == pytest.approx(1.0, abs=1e-14)


def test_laguerre_first_moment():
    assert laguerre_expectation(lambda u: u, 32) == pytest.approx(1.0, rel=1e-12)


def test_laguerre_exponential():
    # oracle: int_0^inf e^{-2u} du = 1/2
    assert laguerre_expectation(math.exp.__call__ if False else (lambda u: math.exp(-u)),
                                32) == pytest.approx(0.5, abs=1e-10)


@pytest.mark.parametrize("k", range(0, 12))
def test_laguerre_moments_are_factorials(k):
    # E[U^k] = k! for U ~ Exp(1), exact up to degree 2n-1
    val = laguerre_expectation(lambda u: u ** k, 32)
    assert val == pytest.approx(math.factorial(k), rel=1e-10)


def test_jacobi_constant():
    assert jacobi_singular_integral(lambda w: 1.0, -0.25, 24) == \
        pytest.approx(1.0 / 0.75, rel=1e-12)


def test_jacobi_monomial():
    assert jacobi_singular_integral(lambda w: w, -0.25, 24) == \
        pytest.approx(1.0 / 1.75, rel=1e-12)


def _adaptive_sqrt_oracle(f, tol=1e-12):
    """int_0^1 w^{-1/2} f(w) dw via w = v^2 and refining trapezoid."""
    prev = None
    n = 64
    while True:
        v = np.linspace(0.0, 1.0, n + 1)
        vals = 2.0 * np.array([f(x * x) for x in v])
        est = np.sum(0.5 * (vals[1:] + vals[:-1]) * (v[1] - v[0]))
        if prev is not None and abs(est - prev) < tol:
            return est
        prev = est
        n *= 2


def test_jacobi_exponential_vs_adaptive_oracle():
    oracle = _adaptive_sqrt_oracle(math.exp)
    val = jacobi_singular_integral(math.exp, -0.5, 16)
    assert val == pytest.approx(oracle, abs=1e-8)


def test_jacobi_rejects_nonintegrable():
    with pytest.raises(InvalidArgumentError):
        jacobi_singular_integral(lambda w: 1.0, -1.0, 8)


def test_jacobi_node_count_monotone_error():
    # monotone smooth integrand: error at 32 nodes <= error at 8 nodes
    exact = _adaptive_sqrt_oracle(lambda w: 1.0 / (1.0 + w))
    e8 = abs(jacobi_singular_integral(lambda w: 1.0 / (1.0 + w), -0.5, 8) - exact)
    e32 = abs(jacobi_singular_integral(lambda w: 1.0 / (1.0 + w), -0.5, 32) - exact)
    assert e32 <= e8


def test_rules_are_deterministic():
    r1, r2 = laguerre_rule(32), laguerre_rule(32)
    assert np.array_equal(r1.nodes, r2.nodes)
    assert np.array_equal(r1.weights, r2.weights)
    j1, j2 = jacobi_rule_01(24, -0.25), jacobi_rule_01(24, -0.25)
    assert np.array_equal(j1.nodes, j2.nodes)
    assert np.array_equal(j1.weights, j2.weights)


def test_shifted_combination_exact_on_constants():
    w = laguerre_rule(32).weights
    vals = np.full(32, 0.1)
    assert shifted_combination(vals, w) == 0.1  # bitwise
    mat = np.full((32, 5), 0.3)
    assert np.all(shifted_combination(mat, w) == 0.3)


def test_jacobi_two_sided_rule_matches_beta_function():
    # int_0^1 w^a (1-w)^b dw = Beta(a+1, b+1)
    from scipy.special import betaln as _betaln
    for a, b in ((-0.25, 0.25), (-0.5, 0.5), (0.3, -0.4)):
        rule = jacobi_rule_01(20, a, b)
        total = float(np.sum(rule.weights))
        assert total == pytest.approx(np.exp(_betaln(a + 1, b + 1)), rel=1e-12)
