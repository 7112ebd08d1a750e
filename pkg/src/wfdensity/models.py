"""The three functional families under study.

* Linear functionals of the driver (exact Gaussian baseline).
* Centered additive functionals int_0^T f(X_s) ds of a Gaussian process.
* Scalar SDEs driven by fractional Brownian motion, H in (1/2, 1),
  solved pathwise with a left-point Euler scheme and equipped with the
  closed-form Malliavin derivative profile.

Models are immutable configuration objects; per-path evaluation is pure
given (model, driver noise).
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from . import _backend, rng
from .errors import (InvalidArgumentError, ModelViolationError,
                     NumericalBlowupError)
from .functions import ParamFunc, const_plus_sine, linear, linear_plus_exp
from .gaussian_process import CovarianceModel, brownian_covariance
from .quadrature import TimeGrid, trapezoid_weights

ScalarFn = Union[ParamFunc, Callable]


# ---------------------------------------------------------------------------
# linear functionals of the Brownian driver


@dataclass(frozen=True)
class LinearFunctionalModel:
    """F = integral of h against the driver; exactly N(0, |h|^2)."""

    grid: TimeGrid
    h: np.ndarray            # values of h on the grid
    sigma_sq: float = field(init=False)

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        if h.shape != (self.grid.n,):
            raise InvalidArgumentError("h must be sampled on the grid")
        object.__setattr__(self, "h", h)
        w = trapezoid_weights(self.grid)
        object.__setattr__(self, "sigma_sq", float(np.sum(w * h * h)))

    def evaluate(self, dW):
        """Per-path (F, DF): F = sum of cell-averaged h times increments."""
        dW = np.atleast_2d(dW)
        h_cell = 0.5 * (self.h[1:] + self.h[:-1])
        F = dW @ h_cell
        return F, self.h

    def coupling(self, n_paths):
        """The derivative pairing is the constant |h|^2 for every path."""
        return np.full(n_paths, self.sigma_sq)


def linear_model(grid, h_const=1.0):
    return LinearFunctionalModel(grid=grid, h=np.full(grid.n, float(h_const)))


# ---------------------------------------------------------------------------
# additive functionals of a centered Gaussian process


@dataclass(frozen=True)
class AdditiveFunctionalModel:
    """Y = int_0^T f(X_s) ds minus its mean.

    Built-in presets keep f at at-most-exponential growth so the Monte
    Carlo moments of f(X_s) and its derivatives stay finite under
    Gaussian paths; no growth check is performed for custom functions.
    """

    f: ScalarFn
    f1: ScalarFn              # f'
    f2: ScalarFn              # f''
    c: float                  # asserted floor of |f'|
    convexity: str            # convex | concave | neither
    cov: CovarianceModel
    T: float
    centering: Optional[float] = None

    def __post_init__(self):
        if self.c <= 0:
            raise InvalidArgumentError("derivative floor c must be positive")
        if self.convexity not in ("convex", "concave", "neither"):
            raise InvalidArgumentError(f"unknown convexity tag {self.convexity}")

    def with_centering(self, value):
        return AdditiveFunctionalModel(f=self.f, f1=self.f1, f2=self.f2,
                                       c=self.c, convexity=self.convexity,
                                       cov=self.cov, T=self.T,
                                       centering=float(value))

    def evaluate(self, paths, grid):
        """(Y, DY density) for a batch of paths; DY density is f'(X_s)."""
        if self.centering is None:
            raise InvalidArgumentError("centering not set; run the pre-pass first")
        w = trapezoid_weights(grid)
        fX = self.f(paths)
        Y = fX @ w - self.centering
        return Y, self.f1(paths)


def centering_prepass(model, grid, n_paths, seed, block=4096):
    """Monte Carlo estimate of int_0^T E[f(X_s)] ds on a dedicated stream.

    Exact zero for pure-linear f (centered process). The block size only
    controls memory; per-path streams keep the estimate independent of it.
    """
    if isinstance(model.f, ParamFunc) and model.f.is_linear_odd:
        return 0.0
    from .gaussian_process import path_rows
    w = trapezoid_weights(grid)
    total = 0.0
    for lo in range(0, n_paths, block):
        rows, _ = path_rows(model.cov, grid, range(lo, min(lo + block, n_paths)),
                            seed, rng_family=rng.PREPASS)
        total += float(np.sum(model.f(rows) @ w))
    return total / n_paths


# ---------------------------------------------------------------------------
# fBm-driven SDEs


@dataclass(frozen=True)
class FbmSdeModel:
    """dX = b(t, X) dt + sigma(t, X) dB^H, pathwise Riemann-Stieltjes."""

    x0: float
    T: float
    H: float
    b: ScalarFn               # drift; ParamFunc means x-only
    sigma: ScalarFn
    b2: ScalarFn              # db/dx
    s1: ScalarFn              # dsigma/dt
    s2: ScalarFn              # dsigma/dx
    c: float                  # asserted floor of |sigma|
    M: float                  # joint bound for |m|, |m'_2 sigma|, |sigma'_2|
    M_m: Optional[float] = None   # bound for |m| alone; defaults to M

    def __post_init__(self):
        if not 0.5 < self.H < 1.0:
            raise InvalidArgumentError("SDE model needs H in (1/2, 1)")
        if self.c <= 0:
            raise InvalidArgumentError("diffusion floor c must be positive")
        if self.M_m is None:
            object.__setattr__(self, "M_m", float(self.M))

    # -- scalar evaluations -------------------------------------------------

    def _eval(self, fn, t, x):
        return fn(x) if isinstance(fn, ParamFunc) else fn(t, x)

    def sigma_at(self, t, x, check=True):
        val = self._eval(self.sigma, t, x)
        if check:
            bad = np.abs(np.asarray(val)) < self.c * (1 - 1e-12)
            if np.any(bad):
                raise ModelViolationError(
                    f"|sigma(t,x)| dropped below the asserted floor c={self.c}")
        return val

    def m_at(self, t, x):
        """m = b'_2 - b sigma'_2 / sigma - sigma'_1 / sigma."""
        sig = self.sigma_at(t, x)
        return (self._eval(self.b2, t, x)
                - self._eval(self.b, t, x) * self._eval(self.s2, t, x) / sig
                - self._eval(self.s1, t, x) / sig)

    @property
    def m_fn(self):
        """m as None (identically zero), a ParamFunc, or a callable."""
        if isinstance(self.b, ParamFunc) and isinstance(self.sigma, ParamFunc):
            if np.array_equal(self.b.coeffs, self.sigma.coeffs):
                return None        # b'_2 and sigma'_2 cancel; sigma'_1 = 0
            s2 = self.s2
            if isinstance(s2, ParamFunc) and np.all(s2.coeffs == 0.0) \
                    and isinstance(self.b2, ParamFunc):
                return None if np.all(self.b2.coeffs == 0.0) else self.b2
        return lambda t, x: self.m_at(t, x)

    @property
    def m_identically_zero(self):
        return self.m_fn is None


def sde_model_from_coeffs(x0, T, H, b_coeffs, sigma_coeffs, c, M, M_m=None):
    b = ParamFunc(b_coeffs)
    s = ParamFunc(sigma_coeffs)
    return FbmSdeModel(x0=x0, T=T, H=H, b=b, sigma=s, b2=b.diff(),
                       s1=ParamFunc([0.0]), s2=s.diff(), c=c, M=M, M_m=M_m)


def solve_sde(model, kernel, dW, grid):
    """Euler scheme on the kernel-synthesized driver.

    kernel=None degrades to a Brownian driver (identity synthesis), the
    regression baseline for classical Euler-Maruyama.
    """
    dW = np.atleast_2d(np.asarray(dW, dtype=float))
    if dW.shape[1] != grid.n_steps:
        raise InvalidArgumentError("increment shape does not match the grid")
    if kernel is None:
        bh = np.concatenate([np.zeros((dW.shape[0], 1)), np.cumsum(dW, axis=1)],
                            axis=1)
    else:
        bh = _backend.bh_from_increments(kernel.matrices(grid).kbar, dW)
    X = _backend.euler_solve(grid.points, model.x0, bh, model.b, model.sigma)
    if not np.all(np.isfinite(X)):
        step = int(np.argmax(~np.isfinite(X).all(axis=0)))
        raise NumericalBlowupError(f"non-finite state at step {step}", step=step)
    return X


def exp_factor_grid(model, X, grid, m_index):
    """E_l = exp(int_{t_l}^{t_m} m(u, X_u) du) per path, or None if m == 0."""
    m_fn = model.m_fn
    if m_fn is None:
        return None
    pts = grid.points
    mv = np.empty_like(X)
    for k in range(X.shape[1]):
        mv[:, k] = m_fn(pts[k], X[:, k]) if not isinstance(m_fn, ParamFunc) \
            else m_fn(X[:, k])
    seg = 0.5 * (mv[:, 1:] + mv[:, :-1]) * np.diff(pts)
    M = np.concatenate([np.zeros((X.shape[0], 1)), np.cumsum(seg, axis=1)], axis=1)
    return np.exp(M[:, m_index:m_index + 1] - M)


def reduced_derivative(model, kernel, X, grid, m_index):
    """sigma(t_m, X_m) c_H (W @ g) per path: the finite reduced profile.

    The full Malliavin derivative is t_j^{1/2-H} times column j; column 0
    carries the finite s -> 0 limit used by singular time quadrature.
    """
    mats = kernel.matrices(grid, m_index)
    E = exp_factor_grid(model, X, grid, m_index)
    g = np.ones_like(X) if E is None else E
    red = kernel.c_H * _backend.reduced_profiles(mats.W, g)
    red[:, m_index:] = 0.0
    sig_t = model.sigma_at(grid.points[m_index], X[:, m_index])
    return np.asarray(sig_t)[:, None] * red


def malliavin_profile(model, kernel, X, grid, m_index):
    """D_s X_{t_m} on the grid; +inf at s=0 (integrable), 0 for s >= t_m."""
    red = reduced_derivative(model, kernel, X, grid, m_index)
    prof = kernel.matrices(grid, m_index).spow * red
    prof[:, m_index:] = 0.0
    return prof


def audit_sde_bounds(model, X, grid):
    """Evaluate |sigma| >= c and |m| <= M over all (path, time) points.

    Returns per-hypothesis (checked, violations, worst_margin); margins
    are value - floor for sigma and bound - |value| for m.
    """
    pts = grid.points
    sig = np.empty_like(X)
    for k in range(X.shape[1]):
        sig[:, k] = model._eval(model.sigma, pts[k], X[:, k])
    sig_margin = np.abs(sig) - model.c
    m_fn = model.m_fn
    if m_fn is None:
        m_abs = np.zeros_like(X)
    else:
        m_abs = np.empty_like(X)
        for k in range(X.shape[1]):
            val = m_fn(X[:, k]) if isinstance(m_fn, ParamFunc) else m_fn(pts[k], X[:, k])
            m_abs[:, k] = np.abs(val)
    m_margin = model.M_m - m_abs
    return {
        "sigma_floor": (sig_margin.size, int(np.sum(sig_margin < 0)),
                        float(sig_margin.min())),
        "m_bound": (m_abs.size, int(np.sum(m_margin < 0)), float(m_margin.min())),
        "m_abs_max": float(m_abs.max()),
    }


# ---------------------------------------------------------------------------
# presets


def make_preset(name, grid, params=None):
    """Model presets named in the experiment schema."""
    params = dict(params or {})
    T = grid.T
    if name == "linear":
        return linear_model(grid, h_const=params.get("h_const", 1.0))
    if name == "additive-linear":
        k = params.get("slope", 2.0)
        f = linear(k)
        return AdditiveFunctionalModel(
            f=f, f1=f.diff(), f2=f.diff().diff(), c=abs(k), convexity="convex",
            cov=brownian_covariance(), T=T, centering=None)
    if name == "additive-exp":
        f = linear_plus_exp(k=1.0, amp=1.0, rate=1.0)
        return AdditiveFunctionalModel(
            f=f, f1=f.diff(), f2=f.diff().diff(), c=params.get("c", 1.0),
            convexity="convex", cov=_cov_from_params(params), T=T,
            centering=None)
    if name == "additive-concave":
        f = linear_plus_exp(k=1.0, amp=-1.0, rate=-1.0)
        return AdditiveFunctionalModel(
            f=f, f1=f.diff(), f2=f.diff().diff(), c=params.get("c", 1.0),
            convexity="concave", cov=_cov_from_params(params), T=T,
            centering=None)
    if name == "sde-sine":
        fn = const_plus_sine(2.0, 1.0, 1.0)
        return FbmSdeModel(
            x0=params.get("x0", 1.0), T=T, H=params.get("H", 0.75),
            b=fn, sigma=fn, b2=fn.diff(), s1=ParamFunc([0.0]), s2=fn.diff(),
            c=params.get("c", 1.0), M=params.get("M", 1.0),
            M_m=params.get("M_m", 0.0))
    if name == "sde-custom":
        return sde_model_from_coeffs(
            x0=params.get("x0", 0.0), T=T, H=params.get("H", 0.75),
            b_coeffs=params.get("b_coeffs", [0.0]),
            sigma_coeffs=params.get("sigma_coeffs", [1.0]),
            c=params["c"], M=params["M"], M_m=params.get("M_m"))
    raise InvalidArgumentError(f"unknown preset {name!r}")


def _cov_from_params(params):
    from .gaussian_process import fbm_covariance_model
    H = params.get("cov_H")
    return fbm_covariance_model(H) if H is not None else brownian_covariance()


PRESET_NAMES = ("linear", "additive-linear", "additive-exp", "additive-concave",
                "sde-sine", "sde-custom")
