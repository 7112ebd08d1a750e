"""Covariance models and Gaussian path sampling.

Houses the centered processes driving both functional families: the
plain Brownian driver and fractional Brownian motion, plus arbitrary
user covariances. Also computes the double time integral of the
covariance that calibrates the additive-functional variance floor.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from . import rng
from .errors import InvalidArgumentError, NumericDegeneracyError
from .quadrature import TimeGrid, trapezoid_weights

_JITTER = 1e-12
_JITTER_ESCALATION = 10.0


def fbm_covariance(s, t, H):
    """Fractional Brownian covariance 0.5 (s^{2H} + t^{2H} - |t-s|^{2H})."""
    if not 0.0 < H < 1.0:
        raise InvalidArgumentError(f"Hurst parameter must lie in (0,1), got {H}")
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(s < 0) or np.any(t < 0):
        raise InvalidArgumentError("times must be nonnegative")
    v = 0.5 * (s ** (2 * H) + t ** (2 * H) - np.abs(t - s) ** (2 * H))
    return float(v) if v.ndim == 0 else v


@dataclass(frozen=True)
class CovarianceModel:
    """Covariance function R(s, t) tagged with its generating family."""

    kind: str                      # "brownian" | "fbm" | "custom"
    R: Callable[[np.ndarray, np.ndarray], np.ndarray]
    H: Optional[float] = None

    def matrix(self, grid):
        pts = grid.points
        return np.asarray(self.R(pts[:, None], pts[None, :]), dtype=float)


def brownian_covariance():
    return CovarianceModel(kind="brownian", R=lambda s, t: np.minimum(s, t))


def fbm_covariance_model(H):
    if not 0.0 < H < 1.0:
        raise InvalidArgumentError(f"Hurst parameter must lie in (0,1), got {H}")
    return CovarianceModel(kind="fbm", R=lambda s, t: fbm_covariance(s, t, H), H=H)


def custom_covariance(R):
    return CovarianceModel(kind="custom", R=R)


@dataclass(frozen=True)
class PathSet:
    """Batch of process paths on a common grid.

    `driver_increments` holds the white-noise increments when the paths
    were built from a Brownian driver; immutable after construction.
    """

    grid: TimeGrid
    paths: np.ndarray                       # (n_paths, n_times)
    driver_increments: Optional[np.ndarray]  # (n_paths, n_times - 1) or None
    seed: int

    @property
    def n_paths(self):
        return self.paths.shape[0]


def _cholesky_with_jitter(mat):
    """Lower Cholesky factor with the documented jitter-retry policy."""
    jitter = 0.0
    scale = float(np.max(np.diag(mat))) if mat.size else 0.0
    for attempt in range(3):
        try:
            return scipy.linalg.cholesky(mat + jitter * np.eye(mat.shape[0]),
                                         lower=True)
        except scipy.linalg.LinAlgError as exc:
            minor = getattr(exc, "info", None)
            msg = str(exc)
            jitter = _JITTER * scale if attempt == 0 else jitter * _JITTER_ESCALATION
    raise NumericDegeneracyError(
        f"covariance factorization failed after jitter retries: {msg}", minor=minor)


def path_rows(cov, grid, indices, seed, rng_family=rng.MAIN_PATHS):
    """Rows (paths, increments) for the given path indices.

    Path i is a pure function of (seed, rng_family, i): any batch or
    block decomposition reproduces the same rows. A zero-variance t=0
    point is pinned to exactly 0 and excluded from the factorization.
    `increments` holds the driving white noise for the Brownian kind,
    else None.
    """
    indices = list(indices)
    pts = grid.points
    n = pts.size
    if not indices:
        return np.zeros((0, n)), None

    if cov.kind == "brownian":
        # exact triangular factor: cumulative sums of sqrt(dt)-scaled normals
        dt = np.diff(pts)
        z = rng.normal_rows(seed, rng_family, indices, n - 1)
        dW = z * np.sqrt(dt)
        paths = np.concatenate([np.zeros((len(indices), 1)),
                                np.cumsum(dW, axis=1)], axis=1)
        return paths, dW

    mat = cov.matrix(grid)
    pin0 = mat[0, 0] == 0.0
    sub = mat[1:, 1:] if pin0 else mat
    L = _cholesky_with_jitter(sub)
    z = rng.normal_rows(seed, rng_family, indices, sub.shape[0])
    # einsum keeps the contraction order fixed regardless of BLAS threading
    core = np.einsum("pj,ij->pi", z, L, optimize=False)
    paths = np.concatenate([np.zeros((len(indices), 1)), core], axis=1) \
        if pin0 else core
    return paths, None


def sample_paths(cov, grid, n_paths, seed, rng_family=rng.MAIN_PATHS):
    """Sample i.i.d. mean-zero Gaussian paths with the grid covariance."""
    if n_paths < 0:
        raise InvalidArgumentError("n_paths must be nonnegative")
    paths, dW = path_rows(cov, grid, range(n_paths), seed, rng_family)
    return PathSet(grid=grid, paths=paths, driver_increments=dW, seed=seed)


def sigma_T_squared(cov, grid):
    """Double trapezoid of R over the grid square.

    Returns (value, min_R); the minimum feeds the R >= 0 hypothesis audit.
    """
    mat = cov.matrix(grid)
    w = trapezoid_weights(grid)
    value = float(np.einsum("i,j,ij->", w, w, mat, optimize=False))
    return value, float(np.min(mat))
