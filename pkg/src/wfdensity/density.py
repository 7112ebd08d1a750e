"""Density reconstruction and Gaussian envelope certificates.

Reconstruction routes:

* nourdin_viens: E|F| / (2 g(x)) exp(-int_0^x z/g(z) dz) from the
  coupling regression.
* exponential form (tags new_repr / clark_ocone): shape
  exp(-int_0^x (w + h)) from the ratio and correction regressions,
  anchored by normalizing mass over the reporting range.
* indicator: mean of 1_{F > x} times the divergence values.
* kde: Gaussian kernel baseline.

Envelope certificates turn coupling floors (and correction bounds) into
pointwise Gaussian lower/upper bounds that the checker compares against
any density estimate.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidArgumentError, RegressionFailureError
from .quadrature import cumtrapz_from_anchor, trapezoid_weights
from .regression import nadaraya_watson, silverman_bandwidth, kde_values

METHOD_TAGS = ("nourdin_viens", "new_repr", "clark_ocone", "indicator", "kde")

G_CLAMP_FLOOR = 1e-8
CLAMP_ABORT_FRACTION = 0.01


@dataclass
class DensityEstimate:
    x_grid: np.ndarray
    values: np.ndarray
    method_tag: str
    mass: float = field(init=False)
    flagged: Optional[np.ndarray] = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method_tag not in METHOD_TAGS:
            raise InvalidArgumentError(f"unknown method tag {self.method_tag}")
        if np.any(np.diff(self.x_grid) <= 0):
            raise InvalidArgumentError("x_grid must be strictly increasing")
        if np.any(self.values < 0):
            raise InvalidArgumentError("density values must be nonnegative")
        w = trapezoid_weights(self.x_grid)
        self.mass = float(np.sum(w * self.values))


@dataclass(frozen=True)
class BoundCertificate:
    """Parameters of a Gaussian envelope, issued only under clean audits.

    m1/m2 bound the correction term from below/above (one-sided
    envelopes); M_h bounds its absolute value (two-sided). rho0 anchors
    the envelope at the centered origin.
    """

    sigma_min_sq: float
    rho0: float
    sigma_max_sq: Optional[float] = None
    m1: Optional[float] = None
    m2: Optional[float] = None
    M_h: Optional[float] = None
    E_abs_F: Optional[float] = None

    def __post_init__(self):
        if self.sigma_min_sq <= 0:
            raise InvalidArgumentError("sigma_min_sq must be positive")
        if self.rho0 <= 0:
            raise InvalidArgumentError("rho0 must be positive")
        if self.sigma_max_sq is not None and self.sigma_max_sq < self.sigma_min_sq:
            raise InvalidArgumentError("sigma_max_sq must dominate sigma_min_sq")


def _anchor_index(x_grid):
    idx = np.where(x_grid == 0.0)[0]
    if idx.size != 1:
        raise InvalidArgumentError("x_grid must contain 0 exactly once")
    return int(idx[0])


def nourdin_viens_density(samples, x_grid, bandwidth=None, e_abs_f=None):
    """Density from the coupling regression.

    g is clamped below at a tiny floor with a logged count; more than 1%
    clamped points aborts, since the exponent integral would be
    meaningless. e_abs_f overrides the sample mean of |F| (used by exact
    collapse tests).
    """
    x_grid = np.asarray(x_grid, dtype=float)
    if samples.values.size == 0:
        raise InvalidArgumentError("no samples")
    i0 = _anchor_index(x_grid)
    bw = silverman_bandwidth(samples.values) if bandwidth is None else bandwidth
    reg = nadaraya_watson(samples.values, samples.couplings, x_grid, bw)
    g = reg.values.copy()
    clamped = int(np.sum(g < G_CLAMP_FLOOR))
    if clamped > CLAMP_ABORT_FRACTION * g.size:
        raise RegressionFailureError(
            f"coupling regression clamped at {clamped}/{g.size} grid points")
    g = np.maximum(g, G_CLAMP_FLOOR)
    expo = cumtrapz_from_anchor(x_grid / g, x_grid, i0)
    e_abs = float(np.mean(np.abs(samples.values))) if e_abs_f is None else e_abs_f
    vals = e_abs / (2.0 * g) * np.exp(-expo)
    return DensityEstimate(x_grid=x_grid, values=vals, method_tag="nourdin_viens",
                           flagged=reg.flagged,
                           diagnostics={"bandwidth": bw, "clamped_points": clamped,
                                        "e_abs_f": e_abs,
                                        "report_range": reg.report_range})


def exponential_density(samples, x_grid, bandwidth=None, method_tag="new_repr"):
    """Density shape exp(-int (ratio + correction)), mass-normalized.

    The anchor value (density at 0) is fixed by normalizing total mass
    to one over the reporting-range portion of the grid; the exponent
    integrals are anchored at 0. Feeding Clark-Ocone samples tags the
    estimate clark_ocone.
    """
    if samples.corrections is None:
        raise InvalidArgumentError("correction samples required")
    x_grid = np.asarray(x_grid, dtype=float)
    i0 = _anchor_index(x_grid)
    bw = silverman_bandwidth(samples.values) if bandwidth is None else bandwidth
    # conditioning on F = z pins the numerator of F/G, so regress 1/G and
    # scale by z: exact for constant couplings, unbiased by the F factor
    reg_w = nadaraya_watson(samples.values, 1.0 / samples.couplings, x_grid, bw)
    reg_h = nadaraya_watson(samples.values, samples.corrections, x_grid, bw)
    expo = cumtrapz_from_anchor(x_grid * reg_w.values + reg_h.values, x_grid, i0)
    shape = np.exp(-expo)
    w = trapezoid_weights(x_grid)
    inside = ~reg_w.flagged
    mass_rr = float(np.sum(w[inside] * shape[inside]))
    if mass_rr <= 0:
        raise RegressionFailureError("degenerate exponential shape")
    vals = shape / mass_rr
    return DensityEstimate(x_grid=x_grid, values=vals, method_tag=method_tag,
                           flagged=reg_w.flagged,
                           diagnostics={"bandwidth": bw,
                                        "rho0": float(vals[i0]),
                                        "report_range": reg_w.report_range})


def indicator_density(samples, x):
    """(estimate, standard error) of the indicator-divergence formula at x.

    Sample mean of 1_{F > x} times the divergence values F/G + h.
    """
    deltas = samples.deltas
    if deltas is None:
        raise InvalidArgumentError("divergence values require correction samples")
    vals = np.where(samples.values > x, deltas, 0.0)
    est = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / np.sqrt(vals.size)) if vals.size > 1 else 0.0
    return est, se


def indicator_density_curve(samples, x_grid):
    ests = np.empty(len(x_grid))
    ses = np.empty(len(x_grid))
    for i, x in enumerate(np.asarray(x_grid, dtype=float)):
        ests[i], ses[i] = indicator_density(samples, x)
    return ests, ses


def kde_density(samples_values, x_grid, bandwidth=None):
    x = np.asarray(samples_values, dtype=float)
    bw = silverman_bandwidth(x) if bandwidth is None else bandwidth
    vals = kde_values(x, np.asarray(x_grid, dtype=float), bw)
    return DensityEstimate(x_grid=np.asarray(x_grid, dtype=float), values=vals,
                           method_tag="kde", diagnostics={"bandwidth": bw})


# ---------------------------------------------------------------------------
# envelopes


def gaussian_envelopes(cert, x_grid):
    """(lower, upper) envelope values; entries are NaN where no bound holds.

    Lower: rho0 exp(-x^2/(2 sigma_min^2) - m2 x) for x >= 0 and with m1
    for x <= 0 when the one-sided correction bounds exist; with only the
    absolute bound, rho0 exp(-x^2/(2 sigma_min^2) - M_h |x|) everywhere.
    Upper (requires sigma_max_sq): same structure with the opposite
    correction bounds and -x^2/(2 sigma_max^2).
    """
    x = np.asarray(x_grid, dtype=float)
    if cert.m1 is None and cert.m2 is None and cert.M_h is None:
        raise InvalidArgumentError(
            "certificate carries no correction bound (m1/m2/M_h)")
    lower = np.full(x.size, np.nan)
    quad_min = x ** 2 / (2.0 * cert.sigma_min_sq)
    if cert.M_h is not None:
        lower = cert.rho0 * np.exp(-quad_min - cert.M_h * np.abs(x))
    if cert.m2 is not None:
        pos = x >= 0
        lower[pos] = np.fmax(np.nan_to_num(lower[pos], nan=-np.inf),
                             cert.rho0 * np.exp(-quad_min[pos] - cert.m2 * x[pos]))
    if cert.m1 is not None:
        neg = x <= 0
        lower[neg] = np.fmax(np.nan_to_num(lower[neg], nan=-np.inf),
                             cert.rho0 * np.exp(-quad_min[neg] - cert.m1 * x[neg]))

    upper = None
    if cert.sigma_max_sq is not None:
        quad_max = x ** 2 / (2.0 * cert.sigma_max_sq)
        upper = np.full(x.size, np.nan)
        if cert.M_h is not None:
            upper = cert.rho0 * np.exp(-quad_max + cert.M_h * np.abs(x))
        if cert.m1 is not None:
            pos = x >= 0
            upper[pos] = np.fmin(np.nan_to_num(upper[pos], nan=np.inf),
                                 cert.rho0 * np.exp(-quad_max[pos] - cert.m1 * x[pos]))
        if cert.m2 is not None:
            neg = x <= 0
            upper[neg] = np.fmin(np.nan_to_num(upper[neg], nan=np.inf),
                                 cert.rho0 * np.exp(-quad_max[neg] - cert.m2 * x[neg]))
    return lower, upper


def sandwich_envelopes(sigma_min_sq, sigma_max_sq, e_abs_f, x_grid):
    """Two-sided envelopes from a coupling sandwich.

    E|F|/(2 sigma_max^2) exp(-x^2/(2 sigma_min^2)) below and
    E|F|/(2 sigma_min^2) exp(-x^2/(2 sigma_max^2)) above.
    """
    if not 0 < sigma_min_sq <= sigma_max_sq:
        raise InvalidArgumentError("need 0 < sigma_min_sq <= sigma_max_sq")
    if e_abs_f <= 0:
        raise InvalidArgumentError("E|F| must be positive")
    x = np.asarray(x_grid, dtype=float)
    lower = e_abs_f / (2.0 * sigma_max_sq) * np.exp(-x ** 2 / (2.0 * sigma_min_sq))
    upper = e_abs_f / (2.0 * sigma_min_sq) * np.exp(-x ** 2 / (2.0 * sigma_max_sq))
    return lower, upper


@dataclass(frozen=True)
class Violation:
    index: int
    x: float
    density: float
    bound: float
    side: str     # "lower" | "upper"


@dataclass(frozen=True)
class ViolationReport:
    method_tag: str
    slack: float
    violations: tuple

    @property
    def passed(self):
        return len(self.violations) == 0


def check_envelope(density, lower, upper=None, slack=0.0):
    """Grid points where the density escapes the slackened envelopes.

    NaN bound entries are skipped (no bound claimed there); assembly is
    ordered by grid index.
    """
    x = density.x_grid
    lower = np.asarray(lower, dtype=float) if lower is not None else None
    found = []
    if lower is not None:
        if lower.shape != x.shape:
            raise InvalidArgumentError("lower envelope grid mismatch")
        bad = density.values < lower * (1.0 - slack)
        bad &= ~np.isnan(lower)
        for i in np.nonzero(bad)[0]:
            found.append(Violation(int(i), float(x[i]), float(density.values[i]),
                                   float(lower[i]), "lower"))
    if upper is not None:
        upper = np.asarray(upper, dtype=float)
        if upper.shape != x.shape:
            raise InvalidArgumentError("upper envelope grid mismatch")
        bad = density.values > upper * (1.0 + slack)
        bad &= ~np.isnan(upper)
        for i in np.nonzero(bad)[0]:
            found.append(Violation(int(i), float(x[i]), float(density.values[i]),
                                   float(upper[i]), "upper"))
    found.sort(key=lambda v: (v.index, v.side))
    return ViolationReport(method_tag=density.method_tag, slack=slack,
                           violations=tuple(found))
