import numpy as np
import pytest

from wfdensity.density import (BoundCertificate, DensityEstimate,
                               check_envelope, exponential_density,
                               gaussian_envelopes, indicator_density,
                               indicator_density_curve, kde_density,
                               nourdin_viens_density, sandwich_envelopes)
from wfdensity.engine import FunctionalSamples
from wfdensity.errors import InvalidArgumentError, RegressionFailureError
from wfdensity.rng import substream


def _phi(x, var=1.0):
    return np.exp(-x ** 2 / (2 * var)) / np.sqrt(2 * np.pi * var)


def _linear_samples(n, seed=1, sigma_sq=1.0, with_h=True):
    F = substream(seed, 9).standard_normal(n) * np.sqrt(sigma_sq)
    G = np.full(n, sigma_sq)
    h = np.zeros(n) if with_h else None
    return FunctionalSamples(values=F, couplings=G, kind="exact", corrections=h)


def _grid(lo=-3.0, hi=3.0, n=121):
    return np.linspace(lo, hi, n)


# -- Nourdin-Viens route ---------------------------------------------------------

def test_nv_constant_coupling_exact_gaussian():
    # analytic E|F| supplied: the output is the exact normal density
    s = _linear_samples(4000, seed=2)
    x = _grid()
    est = nourdin_viens_density(s, x, e_abs_f=np.sqrt(2 / np.pi))
    assert np.max(np.abs(est.values - _phi(x))) < 1e-12
    assert est.method_tag == "nourdin_viens"


def test_nv_linear_model_accuracy():
    s = _linear_samples(50_000, seed=3)
    x = _grid()
    est = nourdin_viens_density(s, x)
    assert np.max(np.abs(est.values - _phi(x))) <= 0.02


def test_nv_empty_samples_error():
    s = FunctionalSamples(values=np.array([]), couplings=np.array([]),
                          kind="exact")
    with pytest.raises(InvalidArgumentError):
        nourdin_viens_density(s, _grid())


def test_nv_requires_zero_on_grid():
    s = _linear_samples(100, seed=4)
    with pytest.raises(InvalidArgumentError):
        nourdin_viens_density(s, np.linspace(0.1, 3, 30))


def test_nv_clamp_abort():
    # negative couplings drive the regression under the clamp floor everywhere
    n = 1000
    F = substream(5, 9).standard_normal(n)
    s = FunctionalSamples(values=F, couplings=np.full(n, -1.0), kind="exact")
    with pytest.raises(RegressionFailureError):
        nourdin_viens_density(s, _grid())


# -- exponential (ratio + correction) route --------------------------------------

def test_exponential_matches_nv_for_constant_coupling():
    # both collapse to the same Gaussian shape; agree pointwise after
    # normalizing on the common reporting range
    s = _linear_samples(20_000, seed=6)
    x = _grid()
    nv = nourdin_viens_density(s, x)
    ex = exponential_density(s, x)
    inside = ~ex.flagged
    from wfdensity.quadrature import trapezoid_weights
    w = trapezoid_weights(x)
    nv_norm = nv.values / np.sum(w[inside] * nv.values[inside])
    ex_norm = ex.values / np.sum(w[inside] * ex.values[inside])
    assert np.max(np.abs(nv_norm[inside] - ex_norm[inside])) < 1e-10


def test_exponential_linear_recovers_gaussian():
    s = _linear_samples(20_000, seed=7)
    x = _grid()
    est = exponential_density(s, x)
    assert np.max(np.abs(est.values - _phi(x))) <= 0.02
    assert est.method_tag == "new_repr"


def test_exponential_clark_ocone_tag():
    s = _linear_samples(5000, seed=8)
    est = exponential_density(s, _grid(), method_tag="clark_ocone")
    assert est.method_tag == "clark_ocone"


def test_exponential_needs_corrections():
    s = _linear_samples(100, seed=9, with_h=False)
    with pytest.raises(InvalidArgumentError):
        exponential_density(s, _grid())


# -- indicator route --------------------------------------------------------------

def test_indicator_zero_beyond_max():
    s = _linear_samples(1000, seed=10)
    est, se = indicator_density(s, float(s.values.max()) + 1.0)
    assert est == 0.0


def test_indicator_zero_mean_divergence():
    # mean of all divergence values is 0 within 3 SE (duality)
    s = _linear_samples(100_000, seed=11)
    est, se = indicator_density(s, -np.inf)
    assert abs(est) <= 3 * se


def test_indicator_matches_gaussian_density():
    s = _linear_samples(100_000, seed=12)
    for x in (-1.0, 0.0, 1.0):
        est, se = indicator_density(s, x)
        assert abs(est - _phi(np.array([x]))[0]) <= 3 * se


def test_indicator_curve_shapes():
    s = _linear_samples(2000, seed=13)
    est, se = indicator_density_curve(s, np.array([-1.0, 0.0, 1.0]))
    assert est.shape == (3,) and se.shape == (3,)


# -- kde ----------------------------------------------------------------------------

def test_kde_density_mass_invariant():
    vals = substream(14, 9).standard_normal(20_000)
    est = kde_density(vals, _grid(-4, 4, 161))
    assert 0.98 <= est.mass <= 1.02


# -- envelopes -----------------------------------------------------------------------

def test_gaussian_envelope_anchor_value():
    x = _grid()
    for cert in (BoundCertificate(sigma_min_sq=0.5, rho0=0.4, M_h=2.0),
                 BoundCertificate(sigma_min_sq=0.5, rho0=0.4, m1=0.0, m2=1.0)):
        lower, _ = gaussian_envelopes(cert, x)
        i0 = np.where(x == 0.0)[0][0]
        assert lower[i0] == pytest.approx(0.4, rel=1e-12)


def test_gaussian_envelope_self_bound():
    cert = BoundCertificate(sigma_min_sq=1.0, rho0=1 / np.sqrt(2 * np.pi), M_h=0.0)
    lower, upper = gaussian_envelopes(cert, _grid())
    assert np.allclose(lower, _phi(_grid()), rtol=1e-12)
    assert upper is None


def test_gaussian_envelope_sde_style_value():
    # lower(1) = rho0 exp(-1/2 - M_h) for sigma_min^2 = 1 (c=1, m-part zero)
    M_h = 4 * np.e ** 2
    cert = BoundCertificate(sigma_min_sq=1.0, rho0=0.3, M_h=M_h)
    x = np.array([-1.0, 0.0, 1.0])
    lower, _ = gaussian_envelopes(cert, x)
    assert lower[2] == pytest.approx(0.3 * np.exp(-0.5 - M_h), rel=1e-12)


def test_gaussian_envelope_one_sided_nan():
    cert = BoundCertificate(sigma_min_sq=1.0, rho0=0.3, m1=0.0)
    lower, _ = gaussian_envelopes(cert, np.array([-1.0, 0.0, 1.0]))
    assert not np.isnan(lower[0])
    assert np.isnan(lower[2])        # no bound claimed for x > 0


def test_gaussian_envelope_requires_bounds():
    cert = BoundCertificate(sigma_min_sq=1.0, rho0=0.3)
    with pytest.raises(InvalidArgumentError):
        gaussian_envelopes(cert, _grid())


def test_gaussian_envelope_monotone_in_sigma_min():
    x = _grid()
    lo1, _ = gaussian_envelopes(BoundCertificate(1.0, 0.4, M_h=0.0), x)
    lo2, _ = gaussian_envelopes(BoundCertificate(2.0, 0.4, M_h=0.0), x)
    nonzero = x != 0.0
    assert np.all(lo2[nonzero] > lo1[nonzero])


def test_sandwich_collapse_to_gaussian():
    x = _grid()
    e_abs = np.sqrt(2 / np.pi)
    lower, upper = sandwich_envelopes(1.0, 1.0, e_abs, x)
    assert np.allclose(lower, _phi(x), rtol=1e-12)
    assert np.allclose(upper, _phi(x), rtol=1e-12)


def test_sandwich_anchor_and_ordering():
    x = _grid()
    lower, upper = sandwich_envelopes(0.8, 1.3, 0.9, x)
    i0 = np.where(x == 0.0)[0][0]
    assert lower[i0] == pytest.approx(0.9 / 2.6, rel=1e-12)
    assert np.all(lower <= upper)


def test_sandwich_rejects_bad_ordering():
    with pytest.raises(InvalidArgumentError):
        sandwich_envelopes(2.0, 1.0, 0.5, _grid())


def test_check_envelope_exact_pass_and_fail():
    x = _grid()
    d = DensityEstimate(x_grid=x, values=_phi(x), method_tag="kde")
    assert check_envelope(d, _phi(x), slack=0.0).passed
    report = check_envelope(d, 2.0 * _phi(x), slack=0.1)
    assert len(report.violations) == x.size
    assert report.violations[0].side == "lower"


def test_check_envelope_kde_vs_true_lower():
    vals = substream(15, 9).standard_normal(100_000)
    x = _grid(-2, 2, 81)
    est = kde_density(vals, x)
    assert check_envelope(est, _phi(x), slack=0.1).passed


def test_density_estimate_rejects_negative_values():
    with pytest.raises(InvalidArgumentError):
        DensityEstimate(x_grid=_grid(), values=-np.ones(121), method_tag="kde")


def test_clark_ocone_density_constant_sigma():
    # sigma const, b = 0: F = sigma B^H_t is exactly N(0, sigma^2 Var B^H_t)
    # and the correction term vanishes (deterministic coupling); the
    # exponential route fed Clark-Ocone samples recovers that normal law
    from wfdensity.engine import NestedConfig, sde_samples
    from wfdensity.models import sde_model_from_coeffs
    from wfdensity.quadrature import trapezoid_weights, uniform_grid
    from wfdensity.volterra import VolterraKernel
    g = uniform_grid(1.0, 33)
    model = sde_model_from_coeffs(0.0, 1.0, 0.75, [0.0], [2.0], c=2.0, M=0.0)
    kernel = VolterraKernel(0.75)
    raw = sde_samples(model, kernel, g, 4000, seed=33,
                      nested_cfg=NestedConfig(n_sub=2, sub_seed=34))
    samples = FunctionalSamples(values=raw.values, couplings=raw.couplings,
                                kind="clark_ocone",
                                corrections=np.zeros(raw.values.size))
    x = np.linspace(-6.0, 6.0, 121)
    est = exponential_density(samples, x, method_tag="clark_ocone")
    assert est.method_tag == "clark_ocone"
    # discrete variance of the synthesized driver fixes the target law
    mats = kernel.matrices(g)
    var = 4.0 * float(np.sum(mats.kbar[-1] ** 2) * np.diff(g.points)[0])
    err = np.max(np.abs(est.values - _phi(x, var=var)))
    assert err <= 0.03
