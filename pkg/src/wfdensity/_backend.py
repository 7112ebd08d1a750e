"""Backend selection: compiled extension core vs numpy fallback.

The compiled core accelerates the hot kernels but only understands the
coefficient-family scalar functions; calls involving arbitrary Python
callables route to the numpy backend regardless of selection. Both
backends implement identical semantics and fixed summation orders.

WFDENSITY_BACKEND = auto (default) | compiled | python
"""

import os

from . import _purepy
from .functions import ParamFunc

try:
    from . import _core as _compiled
except ImportError:  # pragma: no cover - depends on build environment
    _compiled = None

_mode = os.environ.get("WFDENSITY_BACKEND", "auto").lower()
if _mode not in ("auto", "compiled", "python"):
    raise RuntimeError(f"WFDENSITY_BACKEND must be auto|compiled|python, got {_mode}")
if _mode == "compiled" and _compiled is None:
    raise RuntimeError("WFDENSITY_BACKEND=compiled but the extension is not built")


def compiled_available():
    return _compiled is not None


def force_mode(mode):
    """Switch the backend at runtime (tests and benchmarks only)."""
    global _mode
    if mode not in ("auto", "compiled", "python"):
        raise ValueError(mode)
    if mode == "compiled" and _compiled is None:
        raise RuntimeError("compiled backend unavailable")
    _mode = mode


def active_name():
    if _mode == "python" or _compiled is None:
        return "python"
    return "compiled"


def _want_compiled(*funcs):
    if active_name() != "compiled":
        return False
    return all(f is None or isinstance(f, ParamFunc) for f in funcs)


def _coeffs(f):
    return None if f is None else f.coeffs


def bh_from_increments(kbar, dW):
    # matmul-shaped: BLAS outruns the scalar C loop on every size tried,
    # so both backends share the numpy path (see benchmarks/)
    return _purepy.bh_from_increments(kbar, dW)


def euler_solve(tgrid, x0, bh, b, sigma):
    if _want_compiled(b, sigma):
        return _compiled.euler_solve(tgrid, x0, bh, _coeffs(b), _coeffs(sigma))
    return _purepy.euler_solve(tgrid, x0, bh, b, sigma)


def mehler_psi(X, Xc, au, bu, wu, f1):
    if _want_compiled(f1):
        return _compiled.mehler_psi(X, Xc, au, bu, wu, _coeffs(f1))
    return _purepy.mehler_psi(X, Xc, au, bu, wu, f1)


def mehler_q(X, Xc, au, bu, wu, f2):
    if _want_compiled(f2):
        return _compiled.mehler_q(X, Xc, au, bu, wu, _coeffs(f2))
    return _purepy.mehler_q(X, Xc, au, bu, wu, f2)


def reduced_profiles(W, gvals):
    # matmul-shaped: shared numpy path, as for bh_from_increments
    return _purepy.reduced_profiles(W, gvals)


def nested_conditional(dW, X, fresh, j, m, tgrid, kbar, Wrow, c_H,
                       b, sigma, m_fn):
    if _want_compiled(b, sigma, m_fn if isinstance(m_fn, ParamFunc) else None) \
            and (m_fn is None or isinstance(m_fn, ParamFunc)):
        return _compiled.nested_conditional(dW, X, fresh, j, m, tgrid, kbar,
                                            Wrow, c_H, _coeffs(b),
                                            _coeffs(sigma), _coeffs(m_fn))
    return _purepy.nested_conditional(dW, X, fresh, j, m, tgrid, kbar, Wrow,
                                      c_H, b, sigma, m_fn)
