"""Time grids and quadrature primitives.

Three rule families cover every integral in the package: trapezoid on a
time grid, Gauss-Laguerre for exponentially weighted integrals over
[0, inf), and Gauss-Jacobi on [0, 1] for integrable power singularities.
All rules are deterministic pure functions of their inputs; summations
run in a fixed order so results do not depend on thread count.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_jacobi, roots_laguerre, roots_legendre

from .errors import InvalidArgumentError

DEFAULT_LAGUERRE_NODES = 32
DEFAULT_JACOBI_NODES = 24


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing grid on [0, T] starting at 0."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        if pts.ndim != 1 or pts.size < 2:
            raise InvalidArgumentError("grid needs at least 2 points")
        if pts[0] != 0.0:
            raise InvalidArgumentError("grid must start at 0")
        if np.any(np.diff(pts) <= 0):
            raise InvalidArgumentError("grid points must be strictly increasing")

    @property
    def T(self):
        return float(self.points[-1])

    @property
    def n(self):
        return self.points.size

    @property
    def n_steps(self):
        return self.points.size - 1

    def __len__(self):
        return self.points.size


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes/weights pair; `kind` records the generating family."""

    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.nodes.shape != self.weights.shape:
            raise InvalidArgumentError("nodes and weights must have equal length")
        if np.any(self.weights <= 0):
            raise InvalidArgumentError("quadrature weights must be positive")


def uniform_grid(T, n):
    """Uniform grid of n points on [0, T]."""
    if not T > 0:
        raise InvalidArgumentError(f"horizon must be positive, got {T}")
    if n < 2:
        raise InvalidArgumentError(f"need at least 2 grid points, got {n}")
    return TimeGrid(np.linspace(0.0, float(T), int(n)))


def trapezoid_weights(grid):
    """Weight vector w with sum(w * f) equal to the trapezoid rule."""
    pts = grid.points if isinstance(grid, TimeGrid) else np.asarray(grid, dtype=float)
    w = np.zeros(pts.size)
    d = np.diff(pts)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return w


def trapezoid(values, grid):
    """Trapezoid rule of sampled values over the grid."""
    pts = grid.points if isinstance(grid, TimeGrid) else np.asarray(grid, dtype=float)
    vals = np.asarray(values, dtype=float)
    if vals.shape[-1] != pts.size:
        raise InvalidArgumentError(
            f"values length {vals.shape[-1]} does not match grid length {pts.size}")
    d = np.diff(pts)
    return float(np.sum(0.5 * (vals[..., 1:] + vals[..., :-1]) * d)) if vals.ndim == 1 \
        else np.sum(0.5 * (vals[..., 1:] + vals[..., :-1]) * d, axis=-1)


def cumtrapz_from_anchor(values, pts, anchor_index):
    """Cumulative trapezoid integral I(x_k) = int_{x_a}^{x_k} v dx, I(x_a) = 0.

    Works outward in both directions from the anchor so the signed
    integral convention matches int_0^x for grids containing 0.
    """
    vals = np.asarray(values, dtype=float)
    pts = np.asarray(pts, dtype=float)
    seg = 0.5 * (vals[1:] + vals[:-1]) * np.diff(pts)
    out = np.empty_like(vals)
    out[anchor_index] = 0.0
    out[anchor_index + 1:] = np.cumsum(seg[anchor_index:])
    out[:anchor_index] = -np.cumsum(seg[:anchor_index][::-1])[::-1]
    return out


def laguerre_rule(n_nodes=DEFAULT_LAGUERRE_NODES):
    """Rule for int_0^inf e^{-u} f(u) du.

    Weights are renormalized to sum exactly to one so constants are
    integrated exactly; the raw scipy weights are off by a few ulp.
    """
    if n_nodes < 1:
        raise InvalidArgumentError("need at least one Laguerre node")
    x, w = roots_laguerre(int(n_nodes))
    w = w / np.sum(w)
    return QuadratureRule(nodes=x, weights=w, kind="laguerre")


def laguerre_expectation(f, n_nodes=DEFAULT_LAGUERRE_NODES):
    """Approximate int_0^inf e^{-u} f(u) du; exact for poly deg <= 2n-1."""
    rule = laguerre_rule(n_nodes)
    vals = np.asarray([f(u) for u in rule.nodes], dtype=float)
    if not np.all(np.isfinite(vals)):
        raise InvalidArgumentError("integrand not finite on Laguerre nodes")
    return float(np.sum(rule.weights * vals))


def jacobi_rule_01(n_nodes, alpha, beta=0.0):
    """Rule for int_0^1 w^alpha (1-w)^beta g(w) dw with both powers absorbed.

    alpha governs the singularity at w=0, beta the one at w=1; both must
    exceed -1 for integrability.
    """
    if alpha <= -1 or beta <= -1:
        raise InvalidArgumentError(
            f"power weight exponent must exceed -1, got alpha={alpha}, beta={beta}")
    if n_nodes < 1:
        raise InvalidArgumentError("need at least one Jacobi node")
    # scipy convention: weight (1-x)^a (1+x)^b on [-1,1]; map w = (1+x)/2
    x, w = roots_jacobi(int(n_nodes), beta, alpha)
    nodes = 0.5 * (x + 1.0)
    weights = w * 0.5 ** (alpha + beta + 1.0)
    return QuadratureRule(nodes=nodes, weights=weights, kind="jacobi",
                          meta={"alpha": float(alpha), "beta": float(beta)})


def jacobi_singular_integral(g, alpha, n_nodes=DEFAULT_JACOBI_NODES):
    """Approximate int_0^1 w^alpha g(w) dw, alpha in (-1, 0) typical."""
    rule = jacobi_rule_01(n_nodes, alpha)
    vals = np.asarray([g(w) for w in rule.nodes], dtype=float)
    return float(np.sum(rule.weights * vals))


def legendre_rule_01(n_nodes=8):
    """Plain Gauss-Legendre on [0, 1]."""
    x, w = roots_legendre(int(n_nodes))
    return QuadratureRule(nodes=0.5 * (x + 1.0), weights=0.5 * w, kind="legendre")


def shifted_combination(values, weights):
    """sum_k weights[k] * values[k] computed as v0 + sum w_k (v_k - v0).

    Valid whenever the weights sum to one; reproduces constant inputs
    bit-exactly, which downstream identity tests rely on.
    `values` may be an array whose first axis matches `weights`.
    """
    vals = np.asarray(values, dtype=float)
    base = vals[0]
    if vals.ndim == 1:
        return float(base + np.sum(weights * (vals - base)))
    w = weights.reshape((-1,) + (1,) * (vals.ndim - 1))
    return base + np.sum(w * (vals - base), axis=0)
