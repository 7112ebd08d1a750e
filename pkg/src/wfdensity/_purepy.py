"""Numpy implementations of the hot kernels.

This is the fallback backend selected when the compiled extension is
unavailable (or forced via WFDENSITY_BACKEND=python). Each function has
a signature-identical twin in the extension core. Work is chunked in
fixed sizes so results never depend on thread count; matrix products
keep fixed shapes per call for the same reason.
"""

import numpy as np

from .functions import ParamFunc

_MEHLER_CHUNK_ELEMS = 1 << 23


def _as_txfun(fn):
    """Normalize drift/diffusion to a (t, x)->array callable."""
    if isinstance(fn, ParamFunc):
        return lambda t, x: fn(x)
    return fn


def bh_from_increments(kbar, dW):
    """Paths of the kernel-synthesized process: rows kbar @ dW."""
    return np.ascontiguousarray(dW) @ kbar.T


def euler_solve(tgrid, x0, bh, b, sigma):
    """Left-point Euler scheme driven by increments of bh.

    bh has one column per grid point; state starts at x0 (scalar or
    per-path vector). Returns the full state matrix; callers check
    finiteness.
    """
    n_paths, n_pts = bh.shape
    X = np.empty((n_paths, n_pts))
    X[:, 0] = x0
    bf, sf = _as_txfun(b), _as_txfun(sigma)
    x = X[:, 0].copy()
    for k in range(n_pts - 1):
        dt = tgrid[k + 1] - tgrid[k]
        x = x + bf(tgrid[k], x) * dt + sf(tgrid[k], x) * (bh[:, k + 1] - bh[:, k])
        X[:, k + 1] = x
    return X


def _copy_mean(vals):
    """Mean over the copy axis (1), exact for constant inputs."""
    base = vals[:, 0, :]
    return base + np.mean(vals - base[:, None, :], axis=1)


def _path_chunks(n_paths, per_elem):
    step = max(1, _MEHLER_CHUNK_ELEMS // max(1, per_elem))
    return [(i, min(i + step, n_paths)) for i in range(0, n_paths, step)]


def mehler_psi(X, Xc, au, bu, wu, f1):
    """Smoothed-derivative density on the grid.

    psi[p, s] = sum_u wu[u] * mean_c f1(au[u] X[p,s] + bu[u] Xc[c,s]),
    combined with a baseline shift so constant f1 is reproduced
    bit-exactly (the weights sum to one).
    """
    n_paths, S = X.shape
    C = Xc.shape[0]
    U = au.size
    psi = np.empty((n_paths, S))
    for lo, hi in _path_chunks(n_paths, C * S * U):
        vals_u = np.empty((U, hi - lo, S))
        for u in range(U):
            arg = au[u] * X[lo:hi, None, :] + bu[u] * Xc[None, :, :]
            vals_u[u] = _copy_mean(f1(arg))
        base = vals_u[0]
        psi[lo:hi] = base + np.sum(wu[:, None, None] * (vals_u - base[None]), axis=0)
    return psi


def mehler_q(X, Xc, au, bu, wu, f2):
    """Double-rate smoothing: sum_u wu e^{-u} mean_c f2(mixed args).

    The extra e^{-u} equals au[u] under the e^{-u}-weighted rule, giving
    the exp(-2u)-weighted time integral.
    """
    n_paths, S = X.shape
    C = Xc.shape[0]
    U = au.size
    q = np.zeros((n_paths, S))
    for lo, hi in _path_chunks(n_paths, C * S * U):
        acc = np.zeros((hi - lo, S))
        for u in range(U):
            arg = au[u] * X[lo:hi, None, :] + bu[u] * Xc[None, :, :]
            acc += (wu[u] * au[u]) * _copy_mean(f2(arg))
        q[lo:hi] = acc
    return q


def reduced_profiles(W, gvals):
    """Rows of the derivative-profile quadrature: out[p, j] = W[j] . gvals[p]."""
    return np.ascontiguousarray(gvals) @ W.T


def nested_conditional(dW, X, fresh, j, m, tgrid, kbar, Wrow, c_H,
                       b, sigma, m_fn):
    """Conditional mean of the reduced derivative factor at s = t_j.

    For each path, re-solves the dynamics on sub-drivers that share the
    increments on [0, t_j) and are fresh beyond, evaluates
    sigma(t_m, X~_m) * c_H * sum_l Wrow[l] E~_l on each sub-path
    and returns (mean over subs, variance of that mean).
    """
    B, n_steps = dW.shape
    q = fresh.shape[1]
    L = m - j + 1
    dt_cells = np.diff(tgrid)

    dWf = fresh * np.sqrt(dt_cells[j:])[None, None, :]
    # bh at grid indices j..m: frozen-prefix part + fresh part
    pref = dW[:, :j] @ kbar[j:m + 1, :j].T                     # (B, L)
    freshpart = (dWf.reshape(B * q, -1) @ kbar[j:m + 1, j:].T).reshape(B, q, L)
    bh = pref[:, None, :] + freshpart

    bf, sf = _as_txfun(b), _as_txfun(sigma)
    states = np.empty((B, q, L))
    x = np.broadcast_to(X[:, j][:, None], (B, q)).copy()
    states[:, :, 0] = x
    for k in range(j, m):
        i = k - j
        x = x + bf(tgrid[k], x) * dt_cells[k] + sf(tgrid[k], x) * (bh[:, :, i + 1] - bh[:, :, i])
        states[:, :, i + 1] = x

    if m_fn is None:
        gv = np.ones((B, q, L))
    else:
        mf = _as_txfun(m_fn)
        mv = np.empty((B, q, L))
        for i in range(L):
            mv[:, :, i] = mf(tgrid[j + i], states[:, :, i])
        seg = 0.5 * (mv[:, :, 1:] + mv[:, :, :-1]) * dt_cells[j:m][None, None, :]
        M = np.concatenate([np.zeros((B, q, 1)), np.cumsum(seg, axis=2)], axis=2)
        gv = np.exp(M[:, :, -1:] - M)

    r = c_H * (gv * np.asarray(Wrow)[j:m + 1]).sum(axis=2)
    vals = sf(tgrid[m], states[:, :, -1]) * r
    mean = vals.mean(axis=1)
    var_of_mean = vals.var(axis=1, ddof=1) / q if q > 1 else np.zeros(B)
    return mean, var_of_mean
