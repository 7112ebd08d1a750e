"""Parity between the compiled extension core and the numpy fallback.

Every hot kernel is exercised on both backends with identical inputs;
agreement is to tight relative tolerance (summation orders differ, so
bitwise equality is not expected across backends).
"""

import numpy as np
import pytest

import wfdensity._backend as backend
import wfdensity._purepy as purepy
from wfdensity.engine import MehlerConfig, NestedConfig, sde_samples
from wfdensity.functions import const_plus_sine, linear_plus_exp
from wfdensity.models import make_preset
from wfdensity.quadrature import uniform_grid
from wfdensity.rng import normal_rows, substream
from wfdensity.volterra import VolterraKernel

compiled = pytest.importorskip("wfdensity._core")

G = uniform_grid(1.0, 33)
KERNEL = VolterraKernel(0.75)
MATS = KERNEL.matrices(G)


def _dw(seed, n):
    return normal_rows(seed, 1, range(n), G.n_steps) * np.sqrt(np.diff(G.points))


def test_bh_from_increments_parity():
    dW = _dw(1, 16)
    a = compiled.bh_from_increments(MATS.kbar, dW)
    b = purepy.bh_from_increments(MATS.kbar, dW)
    assert np.allclose(a, b, rtol=1e-13, atol=1e-15)
    assert np.all(a[:, 0] == 0.0)


def test_euler_solve_parity():
    fn = const_plus_sine(2.0, 1.0, 1.0)
    dW = _dw(2, 8)
    bh = purepy.bh_from_increments(MATS.kbar, dW)
    a = compiled.euler_solve(G.points, 1.0, bh, fn.coeffs, fn.coeffs)
    b = purepy.euler_solve(G.points, 1.0, bh, fn, fn)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-14)


def test_reduced_profiles_parity():
    g = substream(3, 9).standard_normal((6, G.n)) * 0.1 + 1.0
    a = compiled.reduced_profiles(MATS.W, g)
    b = purepy.reduced_profiles(MATS.W, g)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-14)


def test_mehler_psi_q_parity():
    f = linear_plus_exp(1.0, 1.0, 1.0)
    f1, f2 = f.diff(), f.diff().diff()
    X = substream(4, 9).standard_normal((7, G.n))
    Xc = substream(5, 9).standard_normal((9, G.n))
    from wfdensity.engine import mehler_nodes
    au, bu, wu = mehler_nodes(MehlerConfig(laguerre_nodes=8, n_copies=9))
    pa = compiled.mehler_psi(X, Xc, au, bu, wu, f1.coeffs)
    pb = purepy.mehler_psi(X, Xc, au, bu, wu, f1)
    assert np.allclose(pa, pb, rtol=1e-11, atol=1e-13)
    qa = compiled.mehler_q(X, Xc, au, bu, wu, f2.coeffs)
    qb = purepy.mehler_q(X, Xc, au, bu, wu, f2)
    assert np.allclose(qa, qb, rtol=1e-11, atol=1e-13)


def test_mehler_psi_constant_bitexact_compiled():
    from wfdensity.engine import mehler_nodes
    au, bu, wu = mehler_nodes(MehlerConfig(laguerre_nodes=16, n_copies=5))
    X = substream(6, 9).standard_normal((4, G.n))
    Xc = substream(7, 9).standard_normal((5, G.n))
    const2 = linear_plus_exp(2.0, 0.0, 0.0).diff()  # derivative of 2x
    psi = compiled.mehler_psi(X, Xc, au, bu, wu, const2.coeffs)
    assert np.all(psi == 2.0)


@pytest.mark.parametrize("with_m", [False, True])
def test_nested_conditional_parity(with_m):
    if with_m:
        from wfdensity.models import sde_model_from_coeffs
        model = sde_model_from_coeffs(0.3, 1.0, 0.75, [0.0, 1.0], [2.0],
                                      c=2.0, M=1.0)
    else:
        model = make_preset("sde-sine", G)
        kern = KERNEL
    kern = VolterraKernel(model.H)
    mats = kern.matrices(G)
    from wfdensity.models import solve_sde
    dW = _dw(8, 6)
    X = solve_sde(model, kern, dW, G)
    j, m = 5, G.n_steps
    fresh = substream(9, 9).standard_normal((6, 12, G.n_steps - j))
    m_fn = model.m_fn
    mcoef = None if m_fn is None else m_fn.coeffs
    ma, va = compiled.nested_conditional(dW, X, fresh, j, m, G.points,
                                         mats.kbar, np.asarray(mats.W[j]),
                                         kern.c_H, model.b.coeffs,
                                         model.sigma.coeffs, mcoef)
    mb, vb = purepy.nested_conditional(dW, X, fresh, j, m, G.points,
                                       mats.kbar, mats.W[j], kern.c_H,
                                       model.b, model.sigma, m_fn)
    assert np.allclose(ma, mb, rtol=1e-10, atol=1e-13)
    assert np.allclose(va, vb, rtol=1e-8, atol=1e-15)


def test_full_sde_samples_backend_agreement():
    model = make_preset("sde-sine", G)
    kern = VolterraKernel(model.H)
    cfg = NestedConfig(n_sub=8, sub_seed=10)
    prev = backend.active_name()
    try:
        backend.force_mode("compiled")
        a = sde_samples(model, kern, G, 32, seed=11, nested_cfg=cfg)
        backend.force_mode("python")
        b = sde_samples(model, kern, G, 32, seed=11, nested_cfg=cfg)
    finally:
        backend.force_mode("auto" if prev == "compiled" else prev)
    # same noise streams; values agree to the ulp-level drift of the
    # differing summation orders
    assert np.allclose(a.values, b.values, rtol=1e-10, atol=1e-12)
    assert np.allclose(a.couplings, b.couplings, rtol=1e-9)
    assert np.allclose(a.coupling_se, b.coupling_se, rtol=1e-6, atol=1e-12)


def test_dispatch_uses_python_for_custom_callables():
    # a non-ParamFunc sigma must route to the numpy backend, not crash
    model = make_preset("sde-sine", G)
    object.__setattr__(model, "sigma", lambda t, x: 2.0 + np.sin(x))
    from wfdensity.models import solve_sde
    dW = _dw(12, 3)
    X = solve_sde(model, KERNEL, dW, G)
    assert np.all(np.isfinite(X))


@pytest.mark.parametrize("j", [0, 5, 31])
def test_nested_conditional_parity_edge_rows(j):
    # j = 0 exercises the finite s -> 0 limit row (full resample);
    # j = m-1 the single-cell row
    model = make_preset("sde-sine", G)
    kern = VolterraKernel(model.H)
    mats = kern.matrices(G)
    from wfdensity.models import solve_sde
    dW = _dw(14, 4)
    X = solve_sde(model, kern, dW, G)
    m = G.n_steps
    fresh = substream(15, 9, j).standard_normal((4, 8, G.n_steps - j))
    ma, va = compiled.nested_conditional(dW, X, fresh, j, m, G.points,
                                         mats.kbar, np.asarray(mats.W[j]),
                                         kern.c_H, model.b.coeffs,
                                         model.sigma.coeffs, None)
    mb, vb = purepy.nested_conditional(dW, X, fresh, j, m, G.points,
                                       mats.kbar, mats.W[j], kern.c_H,
                                       model.b, model.sigma, None)
    assert np.allclose(ma, mb, rtol=1e-10, atol=1e-13)
    assert np.allclose(va, vb, rtol=1e-8, atol=1e-16)
