"""Per-path samples of the coupling weights driving the density formulas.

Three sample families:

* additive functionals: the smoothing-semigroup (Mehler) representation
  with a shared pool of independent process copies gives the coupling
  G = <DY, smoothed DY> and its correction term in closed quadrature.
* fBm SDEs, Mehler route: re-solve on interpolated drivers and pair the
  derivative profiles in the L2 sense.
* fBm SDEs, Clark-Ocone route: nested conditional Monte Carlo for
  E[D_s X_t | F_s] with the singular s-quadrature.

All samples are pure functions of (model, seed material, config); path
blocks have a fixed size so thread count never changes a result.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _backend, rng
from .errors import DegenerateSampleError, InvalidArgumentError
from .models import reduced_derivative, solve_sde
from .parallel import map_blocks
from .quadrature import (DEFAULT_LAGUERRE_NODES, TimeGrid, laguerre_rule,
                         shifted_combination, trapezoid_weights)

PATH_BLOCK = 1024
NESTED_PATH_BLOCK = 64

G_DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class HElement:
    """Hilbert-space element represented by a density on the time grid."""

    density: np.ndarray
    grid: TimeGrid


@dataclass(frozen=True)
class MehlerConfig:
    laguerre_nodes: int = DEFAULT_LAGUERRE_NODES
    n_copies: int = 64
    copy_seed: int = 0

    def __post_init__(self):
        if self.laguerre_nodes < 1 or self.n_copies < 1:
            raise InvalidArgumentError("Mehler config counts must be >= 1")


@dataclass(frozen=True)
class NestedConfig:
    n_sub: int = 128
    sub_seed: int = 0

    def __post_init__(self):
        if self.n_sub < 1:
            raise InvalidArgumentError("nested sample count must be >= 1")


@dataclass
class FunctionalSamples:
    """Per-path records feeding the regression layer."""

    values: np.ndarray                        # functional values F
    couplings: np.ndarray                     # G or Phi samples
    kind: str                                 # exact | mehler | clark_ocone
    corrections: Optional[np.ndarray] = None  # h-term samples
    coupling_se: Optional[np.ndarray] = None  # nested-MC standard errors

    @property
    def ratios(self):
        return self.values / self.couplings

    @property
    def deltas(self):
        """Divergence values F/G + h, defined when corrections exist."""
        if self.corrections is None:
            return None
        return self.ratios + self.corrections

    def __post_init__(self):
        if np.any(np.abs(self.couplings) < G_DEGENERACY_TOL):
            raise DegenerateSampleError(
                "coupling sample vanished; density formulas need it nonzero a.s.")


def mehler_nodes(cfg):
    """(e^{-u}, sqrt(1-e^{-2u}), weights) at the Laguerre nodes."""
    rule = laguerre_rule(cfg.laguerre_nodes)
    au = np.exp(-rule.nodes)
    bu = np.sqrt(-np.expm1(-2.0 * rule.nodes))
    return au, bu, rule.weights


# ---------------------------------------------------------------------------
# the Hilbert pairing


def quad_form(cov_matrix, w):
    return float(np.einsum("i,j,ij->", w, w, cov_matrix, optimize=False))


def h_inner_batch(A, B, grid, cov=None):
    """Row-wise pairing of density matrices.

    Covariance mode: int int a(s) b(v) R(s,v) ds dv per row (indicator
    mixtures); L2 mode (cov None): int a b dt. Constant inputs shortcut
    through the scalar quadratic form so exact identities survive.
    """
    w = trapezoid_weights(grid)
    A = np.atleast_2d(A)
    B = np.atleast_2d(B)
    if A.shape != B.shape or A.shape[1] != grid.n:
        raise InvalidArgumentError("density shapes do not match the grid")
    if cov is None:
        return np.sum(A * B * w, axis=1)
    R = cov.matrix(grid)
    if np.ptp(A) == 0.0 and np.ptp(B) == 0.0:
        return np.full(A.shape[0], A.flat[0] * B.flat[0] * quad_form(R, w))
    out = np.empty(A.shape[0])
    for lo in range(0, A.shape[0], PATH_BLOCK):
        hi = min(lo + PATH_BLOCK, A.shape[0])
        left = (A[lo:hi] * w) @ R
        out[lo:hi] = np.sum(left * (B[lo:hi] * w), axis=1)
    return out


def h_inner(a, b, cov=None):
    """Pairing of two HElements sharing a grid."""
    if not np.array_equal(a.grid.points, b.grid.points):
        raise InvalidArgumentError("HElements live on different grids")
    return float(h_inner_batch(a.density[None], b.density[None], a.grid, cov)[0])


# ---------------------------------------------------------------------------
# additive functionals: Mehler coupling and correction


def smoothed_density_batch(model, X, copies, cfg):
    """psi[p, s]: Laguerre/copy average of f'(a_u X + b_u X')."""
    au, bu, wu = mehler_nodes(cfg)
    return _backend.mehler_psi(X, copies, au, bu, wu, model.f1)


def coupling_additive_batch(model, X, copies, cfg, grid, psi=None):
    """G samples: pairing of the derivative density with its smoothing."""
    if psi is None:
        psi = smoothed_density_batch(model, X, copies, cfg)
    dens = model.f1(X)
    return h_inner_batch(dens, psi, grid, model.cov), psi


def correction_additive_batch(model, X, copies, cfg, grid, psi, G):
    """h samples: (1/G^2) <D of the coupling, smoothed derivative>.

    The coupling's derivative density combines the curvature of f along
    the path with the double-rate smoothed curvature, each weighted by
    covariance integrals of the other first-derivative factor.
    """
    au, bu, wu = mehler_nodes(cfg)
    w = trapezoid_weights(grid)
    R = model.cov.matrix(grid)
    q = _backend.mehler_q(X, copies, au, bu, wu, model.f2)
    fppX = model.f2(X)
    f1X = model.f1(X)
    out = np.empty(X.shape[0])
    for lo in range(0, X.shape[0], PATH_BLOCK):
        hi = min(lo + PATH_BLOCK, X.shape[0])
        A_theta = (psi[lo:hi] * w) @ R
        B_theta = (f1X[lo:hi] * w) @ R
        dens_dg = fppX[lo:hi] * A_theta + q[lo:hi] * B_theta
        out[lo:hi] = np.sum((dens_dg * w) @ R * (psi[lo:hi] * w), axis=1)
    return out / G ** 2


def sample_copies(model, grid, cfg):
    """Shared independent-copy pool, drawn once per experiment."""
    from .gaussian_process import sample_paths
    return sample_paths(model.cov, grid, cfg.n_copies, cfg.copy_seed,
                        rng_family=rng.COPY_POOL).paths


def mehler_smoothed_density(model, path, copies, cfg, grid):
    """Single-path HElement of the smoothed derivative density."""
    psi = smoothed_density_batch(model, np.atleast_2d(path), copies, cfg)
    return HElement(density=psi[0], grid=grid)


def coupling_additive(model, path, copies, cfg, grid):
    G, _ = coupling_additive_batch(model, np.atleast_2d(path), copies, cfg, grid)
    if abs(G[0]) < G_DEGENERACY_TOL:
        raise DegenerateSampleError("coupling sample vanished")
    return float(G[0])


def correction_additive(model, path, copies, cfg, grid):
    X = np.atleast_2d(path)
    G, psi = coupling_additive_batch(model, X, copies, cfg, grid)
    return float(correction_additive_batch(model, X, copies, cfg, grid, psi, G)[0])


def additive_samples(model, grid, n_paths, seed, cfg, threads=1,
                     with_corrections=True):
    """FunctionalSamples for the additive model over per-path streams.

    Per-block audit tallies (the |f'| floor over every evaluation) are
    merged in block order after the parallel map, so the result is
    thread-count independent.
    """
    from .gaussian_process import path_rows
    copies = sample_copies(model, grid, cfg)
    F = np.empty(n_paths)
    G = np.empty(n_paths)
    h = np.empty(n_paths) if with_corrections else None
    n_blocks = (n_paths + PATH_BLOCK - 1) // PATH_BLOCK
    f1_checked = np.zeros(n_blocks, dtype=np.int64)
    f1_viol = np.zeros(n_blocks, dtype=np.int64)
    f1_worst = np.full(n_blocks, np.inf)
    f2_viol = np.zeros(n_blocks, dtype=np.int64)
    f2_worst = np.full(n_blocks, np.inf)
    curv_sign = {"convex": 1.0, "concave": -1.0}.get(model.convexity, 0.0)

    def worker(lo, hi):
        bi = lo // PATH_BLOCK
        X, _ = path_rows(model.cov, grid, range(lo, hi), seed)
        Y, dens = model.evaluate(X, grid)
        F[lo:hi] = Y
        Gb, psi = coupling_additive_batch(model, X, copies, cfg, grid)
        G[lo:hi] = Gb
        if with_corrections:
            h[lo:hi] = correction_additive_batch(model, X, copies, cfg, grid,
                                                 psi, Gb)
        margins = np.abs(dens) - model.c
        f1_checked[bi] = margins.size
        f1_viol[bi] = int(np.sum(margins < 0))
        f1_worst[bi] = float(margins.min())
        curv = curv_sign * model.f2(X)
        f2_viol[bi] = int(np.sum(curv < 0))
        f2_worst[bi] = float(curv.min())

    map_blocks(n_paths, PATH_BLOCK, worker, threads)
    samples = FunctionalSamples(values=F, couplings=G, kind="mehler",
                                corrections=h)
    samples.f1_floor_stats = (int(f1_checked.sum()), int(f1_viol.sum()),
                              float(f1_worst.min()))
    samples.f2_sign_stats = (int(f1_checked.sum()), int(f2_viol.sum()),
                             float(f2_worst.min()))
    return samples


# ---------------------------------------------------------------------------
# fBm SDEs: Mehler coupling on interpolated drivers


def coupling_sde_batch(model, kernel, dW, copies_dW, cfg, grid, m_index,
                       nodes_override=None):
    """G samples for F = X_t - E X_t under the Brownian-driver pairing.

    Both derivative profiles carry the s^{1/2-H} prefactor, so their L2
    pairing reduces to the singular quadrature of the product of reduced
    profiles.
    """
    au, bu, wu = mehler_nodes(cfg) if nodes_override is None else nodes_override
    X = solve_sde(model, kernel, dW, grid)
    A = reduced_derivative(model, kernel, X, grid, m_index)
    avg_u = np.empty((au.size,) + A.shape)
    for ui in range(au.size):
        per_copy = np.empty((copies_dW.shape[0],) + A.shape)
        for ci in range(copies_dW.shape[0]):
            mixed = au[ui] * dW + bu[ui] * copies_dW[ci]
            Xm = solve_sde(model, kernel, mixed, grid)
            per_copy[ci] = reduced_derivative(model, kernel, Xm, grid, m_index)
        base = per_copy[0]
        avg_u[ui] = base + np.mean(per_copy - base[None], axis=0)
    psi_bar = shifted_combination(avg_u, wu)
    wr = kernel.q_weights(grid, m_index)
    return (A[:, :m_index + 1] * psi_bar[:, :m_index + 1]) @ wr


def coupling_sde(model, kernel, dW_path, copies_dW, cfg, grid, m_index,
                 nodes_override=None):
    G = coupling_sde_batch(model, kernel, np.atleast_2d(dW_path), copies_dW,
                           cfg, grid, m_index, nodes_override)
    return float(G[0])


def sample_copies_dw(grid, cfg):
    dt = np.diff(grid.points)
    z = rng.normal_rows(cfg.copy_seed, rng.COPY_POOL, range(cfg.n_copies),
                        grid.n_steps)
    return z * np.sqrt(dt)


# ---------------------------------------------------------------------------
# fBm SDEs: Clark-Ocone coupling via nested conditional Monte Carlo


def clark_ocone_batch(model, kernel, dW, grid, m_index, nested_cfg,
                      path_offset=0, frozen_future=False):
    """(Phi, SE) per path.

    Phi = int_0^t D_s X_t E[D_s X_t | F_s] ds with the conditional mean
    estimated from n_sub re-solves sharing increments on [0, s); the
    singular s-quadrature acts on reduced profiles including their
    finite s -> 0 limit. SE propagates the per-s variances of the nested
    means through the quadrature weights.

    frozen_future=True replaces the fresh draws with the path's own
    future increments (diagnostic mode: Phi collapses to int (D_s X_t)^2).
    """
    mats = kernel.matrices(grid, m_index)
    X = solve_sde(model, kernel, dW, grid)
    A = reduced_derivative(model, kernel, X, grid, m_index)
    P = dW.shape[0]
    cond = np.empty((P, m_index + 1))
    var = np.zeros((P, m_index + 1))
    n_steps = grid.n_steps
    m_fn = model.m_fn
    for j in range(m_index + 1):
        if j == m_index:
            # s = t: the profile vanishes there
            cond[:, j] = 0.0
            continue
        if frozen_future:
            fresh = (dW[:, j:] / np.sqrt(np.diff(grid.points))[j:])[:, None, :]
        else:
            fresh = np.empty((P, nested_cfg.n_sub, n_steps - j))
            for p in range(P):
                stream = rng.substream(nested_cfg.sub_seed, rng.NESTED,
                                       path_offset + p, j)
                fresh[p] = stream.standard_normal((nested_cfg.n_sub, n_steps - j))
        mean_j, var_j = _backend.nested_conditional(
            dW, X, fresh, j, m_index, grid.points, mats.kbar, mats.W[j],
            kernel.c_H, model.b, model.sigma, m_fn)
        cond[:, j] = mean_j
        var[:, j] = var_j
    wr = kernel.q_weights(grid, m_index)
    phi = (A[:, :m_index + 1] * cond) @ wr
    se = np.sqrt(((wr * A[:, :m_index + 1]) ** 2 * var).sum(axis=1))
    return phi, se


def clark_ocone_coupling(model, kernel, dW_path, grid, m_index, nested_cfg):
    phi, se = clark_ocone_batch(model, kernel, np.atleast_2d(dW_path), grid,
                                m_index, nested_cfg)
    return float(phi[0]), float(se[0])


def sde_samples(model, kernel, grid, n_paths, seed, nested_cfg, m_index=None,
                threads=1):
    """Clark-Ocone FunctionalSamples for the SDE model.

    Also tallies the diffusion-floor and m-bound audits over every
    (path, time) evaluation, merged deterministically in block order.
    """
    from .models import audit_sde_bounds
    if m_index is None:
        m_index = grid.n_steps
    dt = np.diff(grid.points)
    Xt = np.empty(n_paths)
    phi = np.empty(n_paths)
    se = np.empty(n_paths)
    n_blocks = (n_paths + NESTED_PATH_BLOCK - 1) // NESTED_PATH_BLOCK
    stats = {key: (np.zeros(n_blocks, dtype=np.int64),
                   np.zeros(n_blocks, dtype=np.int64),
                   np.full(n_blocks, np.inf))
             for key in ("sigma_floor", "m_bound")}
    m_abs_max = np.zeros(n_blocks)

    def worker(lo, hi):
        bi = lo // NESTED_PATH_BLOCK
        z = rng.normal_rows(seed, rng.MAIN_PATHS, range(lo, hi), grid.n_steps)
        dW = z * np.sqrt(dt)
        X = solve_sde(model, kernel, dW, grid)
        Xt[lo:hi] = X[:, m_index]
        rec = audit_sde_bounds(model, X, grid)
        for key in ("sigma_floor", "m_bound"):
            checked, viol, worst = rec[key]
            stats[key][0][bi] = checked
            stats[key][1][bi] = viol
            stats[key][2][bi] = worst
        m_abs_max[bi] = rec["m_abs_max"]
        p, s = clark_ocone_batch(model, kernel, dW, grid, m_index, nested_cfg,
                                 path_offset=lo)
        phi[lo:hi] = p
        se[lo:hi] = s

    map_blocks(n_paths, NESTED_PATH_BLOCK, worker, threads)
    F = Xt - Xt.mean()
    samples = FunctionalSamples(values=F, couplings=phi, kind="clark_ocone",
                                coupling_se=se)
    samples.uncentered_values = Xt
    samples.bound_stats = {key: (int(stats[key][0].sum()), int(stats[key][1].sum()),
                                 float(stats[key][2].min()))
                           for key in stats}
    samples.m_abs_max = float(m_abs_max.max())
    return samples


def sde_correction_bound(model):
    """Analytic a.s. bound for the Clark-Ocone correction term.

    2 M (1+T) e^{2MT} / c; used in place of pathwise correction samples,
    which the SDE route never estimates.
    """
    if model.c <= 0:
        raise InvalidArgumentError("diffusion floor must be positive")
    return 2.0 * model.M * (1.0 + model.T) * np.exp(2.0 * model.M * model.T) \
        / model.c
