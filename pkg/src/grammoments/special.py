"""Gamma-family scalar functions.

``log_gamma`` and ``regularized_lower_gamma`` delegate to the C library /
Cephes kernels (``math.lgamma`` and ``scipy.special.gammainc``), which already
use the Lanczos approximation and the series / continued fraction split.
Only the domain checks live here.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as _sp


def log_gamma(x: float) -> float:
    """Natural logarithm of ``Gamma(x)`` for ``x > 0``."""
    x = float(x)
    if not x > 0.0:
        raise ValueError(f"log_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


def regularized_lower_gamma(s, x):
    """``P(s, x) = gamma(s, x) / Gamma(s)``.

    Accepts scalars or arrays for ``x``; returns a float for scalar input.
    """
    s_arr = np.asarray(s, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    if np.any(~(s_arr > 0.0)):
        raise ValueError(f"regularized_lower_gamma requires s > 0, got {s!r}")
    if np.any(~(x_arr >= 0.0)):
        raise ValueError(f"regularized_lower_gamma requires x >= 0, got {x!r}")
    out = _sp.gammainc(s_arr, x_arr)
    if out.ndim == 0:
        return float(out)
    return out


def gamma_ratio_rising(base: float, p: int) -> float:
    """Rising product ``base * (base + 1) * ... * (base + p - 1)``.

    Equals ``Gamma(base + p) / Gamma(base)`` but is formed as a direct product,
    so it stays exact for small integer arguments and never evaluates two
    large gamma values. Returns 1 for ``p == 0``.
    """
    if int(p) != p or p < 0:
        raise ValueError(f"p must be a nonnegative integer, got {p!r}")
    out = 1.0
    for j in range(int(p)):
        out *= base + j
    if not math.isfinite(out):
        raise OverflowError(f"rising product base={base!r}, p={p} exceeds the float range")
    return out
