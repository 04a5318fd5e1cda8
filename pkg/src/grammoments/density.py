"""Truncated Laguerre-series approximation of a density on ``[0, inf)`` from its moments.

The density is written as a gamma weight with scale ``c`` and shape ``nu + 1``
(matched to the first two moments) times a polynomial correction

    f_K(x) = x^nu exp(-x/c) / c^(nu+1) * sum_{i<=K} delta_i Lc_i(nu, x/c)

where ``Lc_i(nu, y) = (-1)^i L_i^(nu)(y)`` with ``L_i^(nu)`` the generalized
Laguerre polynomial. Coefficients ``delta_i`` are finite alternating sums of
the moments and lose digits to cancellation as ``i`` grows, so every term is
formed separately and the sum is exactly rounded with ``math.fsum``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate
from scipy import special as _sp

from .exceptions import DegenerateMomentsError, MissingMomentError, QuadratureError
from .special import regularized_lower_gamma
from .stable import MomentTable

#: Monotonicity / range slack allowed in an evaluated CDF.
CDF_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class DensityModel:
    """Fitted truncated Laguerre expansion.

    Attributes
    ----------
    c : float
        Scale, ``(mu2 - mu1^2) / mu1``.
    nu : float
        Shape exponent, ``mu1 / c - 1``.
    delta : ndarray
        Expansion coefficients ``delta_0 .. delta_K``.
    K : int
        Truncation order.
    source_moments : MomentTable
        Moments the fit was computed from.
    """

    c: float
    nu: float
    delta: np.ndarray
    K: int
    source_moments: MomentTable

    @property
    def mean(self) -> float:
        return self.source_moments[1]

    @property
    def variance(self) -> float:
        return self.source_moments[2] - self.source_moments[1] ** 2

    def default_upper(self, tail: float = 1e-14) -> float:
        """Point beyond which every retained basis term carries negligible mass.

        The heaviest term behaves like ``y^(nu+K) exp(-y)``, so the upper
        quantile of a gamma variable with that shape bounds the support used
        for quadrature.
        """
        y = float(_sp.gammainccinv(self.nu + self.K + 1.0, tail))
        return self.c * y

    def default_grid(self, points: int = 512) -> np.ndarray:
        hi = self.mean + 10.0 * math.sqrt(self.variance)
        return np.linspace(0.0, hi, points)


@dataclass(frozen=True, eq=False)
class DensityEvaluation:
    """PDF and CDF of a fitted model tabulated on an ascending grid.

    Truncation makes the series oscillate slightly, so the CDF can leave
    ``[0, 1]`` or decrease by small amounts. Those excursions are exposed as
    attributes; :meth:`check` turns them into an error at a chosen tolerance.
    """

    grid: np.ndarray
    pdf: np.ndarray
    cdf: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        if grid.ndim != 1 or np.any(np.diff(grid) < 0.0) or (grid.size and grid[0] < 0.0):
            raise ValueError("grid must be a one-dimensional ascending array of values >= 0")
        if np.shape(self.pdf) != grid.shape or np.shape(self.cdf) != grid.shape:
            raise ValueError("pdf and cdf must match the grid shape")

    @property
    def cdf_excursion(self) -> float:
        """Largest distance of a CDF value outside ``[0, 1]`` (0 when inside)."""
        cdf = np.asarray(self.cdf)
        if cdf.size == 0:
            return 0.0
        return float(max(0.0, -cdf.min(), cdf.max() - 1.0))

    @property
    def cdf_max_decrease(self) -> float:
        drop = np.diff(np.asarray(self.cdf))
        return float(max(0.0, -drop.min())) if drop.size else 0.0

    @property
    def min_pdf(self) -> float:
        return float(np.min(self.pdf)) if np.size(self.pdf) else 0.0

    def check(self, tol: float = CDF_TOL) -> "DensityEvaluation":
        if self.cdf_excursion > tol:
            raise ValueError(f"truncated CDF leaves [0, 1] by {self.cdf_excursion:.3e} (> {tol:g})")
        if self.cdf_max_decrease > tol:
            raise ValueError(f"truncated CDF decreases by {self.cdf_max_decrease:.3e} (> {tol:g})")
        return self


def _signed_log_moments(table: MomentTable, K: int) -> np.ndarray:
    missing = [p for p in range(K + 1) if p not in table]
    if missing:
        raise MissingMomentError(f"fit of order {K} needs moments {missing}")
    return np.log(table.as_array(K))


def fit_density(moments: MomentTable, K: int) -> DensityModel:
    """Fit the order-``K`` Laguerre expansion to moments ``0..max(K, 2)``.

    ``delta_i = sum_k (-1)^k C(i, k) r_{i-k}`` with normalized moments
    ``r_j = mu(j) / (c^j Gamma(nu + j + 1))``, i.e. the ``i``-th forward
    difference of ``r``. Each ``r_j`` is a direct quotient (from logarithms
    where that overflows), binomials are exact integers, and the alternating
    sum is exactly rounded.
    """
    if int(K) != K or K < 0:
        raise ValueError(f"truncation order must be a nonnegative integer, got {K!r}")
    K = int(K)
    for p in (0, 1, 2):
        if p not in moments:
            raise MissingMomentError(f"fit needs moment of order {p}")
    mu1, mu2 = moments[1], moments[2]
    var = mu2 - mu1 * mu1
    if not var > 0.0:
        raise DegenerateMomentsError(f"mu(2) - mu(1)^2 = {var!r} is not positive")
    c = var / mu1
    nu = mu1 / c - 1.0
    if not nu > -1.0:
        raise DegenerateMomentsError(f"shape nu = {nu!r} must exceed -1")

    logmu = _signed_log_moments(moments, K)
    j = np.arange(K + 1)
    log_r = logmu - j * math.log(c) - _sp.gammaln(nu + j + 1.0)
    # direct quotient keeps exact cases exact (e.g. p!/Gamma(p+1)); logs only where it overflows
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        direct = moments.as_array(K) / (c**j * _sp.gamma(nu + j + 1.0))
    ok = np.isfinite(direct) & (direct > 0.0)
    r = np.where(ok, direct, np.exp(log_r))
    delta = np.empty(K + 1)
    for i in range(K + 1):
        terms = [(-1) ** k * math.comb(i, k) * r[i - k] for k in range(i + 1)]
        terms.sort(key=abs, reverse=True)
        delta[i] = math.fsum(terms)
    delta.setflags(write=False)
    return DensityModel(c, nu, delta, K, moments)


def _laguerre_rows(nu: float, K: int, y: np.ndarray) -> np.ndarray:
    """Standard generalized Laguerre ``L_i^(nu)(y)`` for ``i = 0..K`` (rows)."""
    out = np.empty((K + 1,) + y.shape)
    out[0] = 1.0
    if K >= 1:
        out[1] = 1.0 + nu - y
    for i in range(1, K):
        out[i + 1] = ((2 * i + 1 + nu - y) * out[i] - (i + nu) * out[i - 1]) / (i + 1)
    return out


def laguerre_eval(nu: float, i: int, x):
    """Polynomial ``sum_k (-1)^k Gamma(nu+i+1) x^(i-k) / (k! (i-k)! Gamma(nu+i-k+1))``.

    This is ``(-1)^i`` times the generalized Laguerre polynomial, so it is
    evaluated with the three-term recurrence instead of the alternating sum.
    """
    if not nu > -1.0:
        raise ValueError(f"nu must exceed -1, got {nu!r}")
    if int(i) != i or i < 0:
        raise ValueError(f"order must be a nonnegative integer, got {i!r}")
    x_arr = np.asarray(x, dtype=float)
    val = (-1) ** int(i) * _laguerre_rows(nu, int(i), x_arr)[int(i)]
    return float(val) if val.ndim == 0 else val


def _weight_log(nu: float, y: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        logy = np.log(y)
        w = nu * logy - y
    if nu == 0.0:
        w = np.where(y == 0.0, 0.0, w)
    return w


def _signed_delta(model: DensityModel) -> np.ndarray:
    # fold the (-1)^i of Lc_i into the coefficients so the sum uses standard L_i
    return model.delta * (-1.0) ** np.arange(model.K + 1)


def approx_pdf(model: DensityModel, lam):
    """Truncated-series density; may dip below zero where the truncation oscillates."""
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr < 0.0):
        raise ValueError("approx_pdf is defined for lambda >= 0")
    y = lam_arr / model.c
    series = np.tensordot(_signed_delta(model), _laguerre_rows(model.nu, model.K, y), axes=1)
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.exp(_weight_log(model.nu, y)) / model.c * series
    return float(out) if out.ndim == 0 else out


def approx_cdf(model: DensityModel, lam):
    """Integral of :func:`approx_pdf` from 0 to ``lam``.

    The ``i = 0`` term is a regularized incomplete gamma function. Higher
    terms use ``int_0^y t^nu e^-t L_i^(nu)(t) dt = y^(nu+1) e^-y L_{i-1}^(nu+1)(y) / i``,
    which is the termwise incomplete-gamma expansion summed in closed form.
    """
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr < 0.0):
        raise ValueError("approx_cdf is defined for lambda >= 0")
    y = lam_arr / model.c
    nu, K = model.nu, model.K
    gamma_nu1 = math.exp(math.lgamma(nu + 1.0))
    out = model.delta[0] * gamma_nu1 * regularized_lower_gamma(nu + 1.0, y)
    if K >= 1:
        sd = _signed_delta(model)[1:] / np.arange(1, K + 1)
        series = np.tensordot(sd, _laguerre_rows(nu + 1.0, K - 1, y), axes=1)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            w = np.exp(_weight_log(nu + 1.0, y))
        w = np.where(y == 0.0, 0.0, w)
        out = out + w * series
    out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out


def evaluate_density(model: DensityModel, grid=None) -> DensityEvaluation:
    grid = model.default_grid() if grid is None else np.asarray(grid, dtype=float)
    return DensityEvaluation(grid, approx_pdf(model, grid), approx_cdf(model, grid))


def expected_functional(
    model: DensityModel,
    g: Callable[[float], float],
    upper: float | None = None,
    rtol: float = 1e-8,
) -> float:
    """``int_0^upper g(x) f_K(x) dx`` by adaptive quadrature.

    ``upper`` defaults to :meth:`DensityModel.default_upper`, beyond which the
    expansion holds negligible mass.
    """
    upper = model.default_upper() if upper is None else float(upper)
    # split at a few multiples of the scale so the bulk is resolved before the tail
    marks = [m for m in (model.mean, model.mean + 4.0 * math.sqrt(model.variance)) if 0.0 < m < upper]

    def integrand(x):
        return g(x) * approx_pdf(model, x)

    value, abserr, info = integrate.quad(
        integrand, 0.0, upper, points=marks or None, epsabs=0.0, epsrel=rtol,
        limit=500, full_output=True,
    )[:3]
    if abserr > max(rtol * abs(value), 1e-14):
        raise QuadratureError(
            f"quadrature reached only {abserr:.3e} absolute error (requested rtol {rtol:g})",
            achieved=abserr,
        )
    return value
