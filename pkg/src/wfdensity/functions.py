"""Closed scalar-function family used by model presets.

f(x) = a0 + a1 x + a2 exp(a3 x) + a4 sin(a5 x) + a6 cos(a7 x)

The family is closed under differentiation, which gives every preset its
exact derivatives, and the coefficient vector doubles as the descriptor
the compiled backend evaluates without Python callbacks. Models may also
use arbitrary vectorized callables; those run on the python backend.
"""

import numpy as np

N_COEFFS = 8


class ParamFunc:
    """Scalar function from the coefficient family; vectorized callable."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.zeros(N_COEFFS)
        c[: len(coeffs)] = coeffs
        self.coeffs = c

    def __call__(self, x):
        a = self.coeffs
        x = np.asarray(x, dtype=float)
        out = a[0] + a[1] * x
        if a[2] != 0.0:
            out = out + a[2] * np.exp(a[3] * x)
        if a[4] != 0.0:
            out = out + a[4] * np.sin(a[5] * x)
        if a[6] != 0.0:
            out = out + a[6] * np.cos(a[7] * x)
        return out if out.ndim else float(out)

    def diff(self):
        a = self.coeffs
        return ParamFunc([a[1], 0.0,
                          a[2] * a[3], a[3],
                          -a[6] * a[7], a[7],
                          a[4] * a[5], a[5]])

    @property
    def is_constant(self):
        a = self.coeffs
        return a[1] == 0.0 and a[2] == 0.0 and a[4] == 0.0 and a[6] == 0.0

    @property
    def is_linear_odd(self):
        # pure a1*x term: mean zero under any centered law
        a = self.coeffs
        return a[0] == 0.0 and a[2] == 0.0 and a[4] == 0.0 and a[6] == 0.0

    def __repr__(self):
        return f"ParamFunc({list(self.coeffs)})"


def constant(c):
    return ParamFunc([c])


def linear(k, b=0.0):
    return ParamFunc([b, k])


def linear_plus_exp(k=1.0, amp=1.0, rate=1.0, b=0.0):
    """k*x + amp*exp(rate*x) + b."""
    return ParamFunc([b, k, amp, rate])


def const_plus_sine(c=2.0, amp=1.0, freq=1.0):
    """c + amp*sin(freq*x)."""
    return ParamFunc([c, 0.0, 0.0, 0.0, amp, freq])


def coeffs_or_none(fn):
    """Descriptor array when fn belongs to the family, else None."""
    return fn.coeffs if isinstance(fn, ParamFunc) else None
