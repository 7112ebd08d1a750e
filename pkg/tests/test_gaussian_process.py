import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wfdensity.errors import InvalidArgumentError
from wfdensity.gaussian_process import (brownian_covariance, custom_covariance,
                                        fbm_covariance, fbm_covariance_model,
                                        sample_paths, sigma_T_squared)
from wfdensity.quadrature import uniform_grid


def test_fbm_covariance_variance_case():
    for t in (0.3, 1.0, 2.5):
        assert fbm_covariance(t, t, 0.7) == pytest.approx(t ** 1.4, rel=1e-14)


def test_fbm_covariance_brownian_reduction():
    assert fbm_covariance(0.4, 0.9, 0.5) == pytest.approx(0.4, rel=1e-14)
    assert fbm_covariance(1.7, 0.2, 0.5) == pytest.approx(0.2, rel=1e-14)


def test_fbm_covariance_direct_value():
    # 0.5 (1 + 2^{1.5} - 1) = sqrt(2)
    assert fbm_covariance(1.0, 2.0, 0.75) == pytest.approx(np.sqrt(2.0), rel=1e-12)


def test_fbm_covariance_rejects_bad_hurst():
    for H in (0.0, 1.0, -0.3, 1.5):
        with pytest.raises(InvalidArgumentError):
            fbm_covariance(0.5, 0.5, H)


@given(st.floats(0.01, 5.0), st.floats(0.01, 5.0), st.floats(0.05, 0.95))
@settings(max_examples=200, deadline=None)
def test_fbm_covariance_symmetry(s, t, H):
    assert fbm_covariance(s, t, H) == pytest.approx(fbm_covariance(t, s, H),
                                                    rel=1e-12, abs=1e-15)


def test_fbm_covariance_nonnegative_above_half():
    # Positive-correlation hypothesis holds for H > 1/2 on the grid square
    g = uniform_grid(1.0, 51)
    for H in (0.6, 0.75, 0.9):
        mat = fbm_covariance_model(H).matrix(g)
        assert mat.min() >= 0.0


def test_sample_paths_empty():
    ps = sample_paths(brownian_covariance(), uniform_grid(1.0, 11), 0, seed=1)
    assert ps.paths.shape == (0, 11)


def test_sample_paths_pins_zero():
    ps = sample_paths(brownian_covariance(), uniform_grid(1.0, 11), 7, seed=1)
    assert np.all(ps.paths[:, 0] == 0.0)
    ps2 = sample_paths(fbm_covariance_model(0.75), uniform_grid(1.0, 11), 7, seed=1)
    assert np.all(ps2.paths[:, 0] == 0.0)


def test_brownian_terminal_variance_ci():
    # 99% CI for the sample variance of N(0,1) at n = 1e4: about +-2.576*sqrt(2/n)
    ps = sample_paths(brownian_covariance(), uniform_grid(1.0, 65), 10_000, seed=42)
    v = ps.paths[:, -1].var(ddof=1)
    assert 0.94 <= v <= 1.06


def test_fbm_terminal_variance_ci():
    ps = sample_paths(fbm_covariance_model(0.75), uniform_grid(1.0, 65), 10_000,
                      seed=43)
    v = ps.paths[:, -1].var(ddof=1)
    assert abs(v - 1.0) <= 0.06


def test_sample_paths_reproducible_and_batch_invariant():
    cov = fbm_covariance_model(0.6)
    g = uniform_grid(1.0, 33)
    a = sample_paths(cov, g, 16, seed=99).paths
    b = sample_paths(cov, g, 16, seed=99).paths
    assert np.array_equal(a, b)
    # path i does not depend on the batch size
    c = sample_paths(cov, g, 4, seed=99).paths
    assert np.array_equal(a[:4], c)


def test_brownian_empirical_covariance_matches_min():
    # entrywise z-score below 5 at 1e5 paths on a small grid
    g = uniform_grid(1.0, 9)
    ps = sample_paths(brownian_covariance(), g, 100_000, seed=7)
    emp = ps.paths.T @ ps.paths / ps.n_paths
    truth = np.minimum.outer(g.points, g.points)
    # var of X_s X_t estimate: (R_ss R_tt + R_st^2)/n
    se = np.sqrt((np.outer(g.points, g.points) + truth ** 2) / ps.n_paths)
    z = np.abs(emp - truth)[1:, 1:] / se[1:, 1:]
    assert z.max() < 5.0


def test_driver_increments_reconstruct_brownian():
    g = uniform_grid(1.0, 17)
    ps = sample_paths(brownian_covariance(), g, 5, seed=3)
    rebuilt = np.cumsum(ps.driver_increments, axis=1)
    assert np.allclose(ps.paths[:, 1:], rebuilt, atol=0, rtol=0)


def test_sigma_T_squared_degenerate():
    g = uniform_grid(1e-9, 2)
    v, _ = sigma_T_squared(brownian_covariance(), g)
    assert v == pytest.approx(0.0, abs=1e-18)


def test_sigma_T_squared_brownian():
    # oracle: int int min(s,v) ds dv = T^3/3
    g = uniform_grid(1.0, 201)
    v, rmin = sigma_T_squared(brownian_covariance(), g)
    assert v == pytest.approx(1.0 / 3.0, abs=1e-3)
    assert rmin == 0.0


def test_sigma_T_squared_fbm_grid_refinement():
    cov = fbm_covariance_model(0.75)
    coarse, _ = sigma_T_squared(cov, uniform_grid(1.0, 101))
    fine, _ = sigma_T_squared(cov, uniform_grid(1.0, 1001))
    assert coarse == pytest.approx(fine, abs=1e-3)


def test_custom_covariance_degenerate_raises():
    # indefinite matrix stays non-PD through the jitter escalation
    from wfdensity.errors import NumericDegeneracyError
    bad = custom_covariance(lambda s, t: -np.minimum(s, t))
    with pytest.raises(NumericDegeneracyError):
        sample_paths(bad, uniform_grid(1.0, 9), 3, seed=1)
