"""Vandermonde-free moments of one-side correlated Gram matrices.

The moment formula needs ``alpha_{k,tau} = sum_l Psi^{-1}_{k,l} beta_l^tau``,
i.e. the coordinates of ``X^tau`` reduced modulo ``A(X) = prod_i (X - beta_i)``
in the monomial basis ``1, X, ..., X^{q-1}``. Writing

    sum_k alpha_{k,tau} X^{k-1} - X^tau = Q(X) A(X)

the quotient ``Q`` solves a unit upper-triangular Toeplitz system built from
the coefficients of ``A``, so ``alpha`` follows from one back-substitution and
one convolution. No matrix is inverted.

Coefficient vectors are 0-based in code: ``a[i]`` multiplies ``X**i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .exceptions import MomentOverflowError
from .special import gamma_ratio_rising
from .spectrum import EnsembleConfig, Spectrum

ENGINES = ("stable", "baseline", "empirical")


@dataclass(frozen=True, eq=False)
class MonicCoefficients:
    """Coefficients of ``prod_i (X - beta_i)`` in ascending powers (length ``q + 1``)."""

    a: np.ndarray

    @property
    def q(self) -> int:
        return self.a.size - 1

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, self.a)


@dataclass(frozen=True, eq=False)
class QuotientCoefficients:
    """Coefficients of ``Q`` (ascending powers, length ``tau - q + 1``) for one ``tau``."""

    b: np.ndarray
    tau: int


@dataclass(frozen=True, eq=False)
class AlphaVector:
    """``alpha_tau``, the solution of ``Psi alpha = (beta_1^tau, ..., beta_q^tau)``."""

    alpha: np.ndarray
    tau: int


@dataclass(frozen=True)
class MomentTable:
    """Moments ``mu(p)`` indexed by order, tagged with the engine that produced them."""

    moments: Mapping[int, float]
    engine: str

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}")
        moments = {int(p): float(v) for p, v in dict(self.moments).items()}
        if 0 not in moments:
            raise ValueError("moment table must contain order 0")
        if abs(moments[0] - 1.0) > 1e-9:
            raise ValueError(f"mu(0) must be 1, got {moments[0]!r}")
        bad = [p for p, v in moments.items() if not v > 0.0]
        if bad:
            raise ValueError(f"moments must be positive; orders {bad} are not")
        object.__setattr__(self, "moments", MappingProxyType(dict(sorted(moments.items()))))

    def __getitem__(self, p: int) -> float:
        return self.moments[p]

    def __contains__(self, p) -> bool:
        return p in self.moments

    def __len__(self) -> int:
        return len(self.moments)

    @property
    def max_order(self) -> int:
        return max(self.moments)

    def as_array(self, p_max: int | None = None) -> np.ndarray:
        p_max = self.max_order if p_max is None else p_max
        return np.array([self.moments[p] for p in range(p_max + 1)])

    def log_convexity_violations(self) -> list[int]:
        """Orders ``p`` where ``mu(p) mu(p+2) < mu(p+1)^2`` for stored consecutive triples."""
        m = self.moments
        return [p for p in m if p + 1 in m and p + 2 in m and m[p] * m[p + 2] < m[p + 1] ** 2]


def monic_coefficients(spectrum: Spectrum) -> MonicCoefficients:
    """Expand ``prod (X - beta_i)`` by multiplying in one root at a time, smallest first."""
    a = np.array([1.0])
    for beta in spectrum.values:
        nxt = np.zeros(a.size + 1)
        nxt[1:] = a
        nxt[:-1] -= beta * a
        a = nxt
    a.setflags(write=False)
    return MonicCoefficients(a)


def _back_substitute(a: np.ndarray, n: int) -> np.ndarray:
    """Solve the ``n x n`` upper-triangular Toeplitz system for ``Q``.

    Row ``r`` reads ``sum_{j >= r} a[q - (j - r)] b[j] = 0`` except the last,
    ``a[q] b[n-1] = -1``. Unknowns are recovered from the last row upward.
    """
    q = a.size - 1
    lead = a[q]
    b = np.empty(n)
    b[n - 1] = -1.0 / lead
    with np.errstate(over="raise", invalid="raise"):
        try:
            for r in range(n - 2, -1, -1):
                hi = min(n, r + q + 1)
                diag_offsets = q - np.arange(1, hi - r)  # a index for j = r+1 .. hi-1
                b[r] = -math.fsum(a[diag_offsets] * b[r + 1:hi]) / lead
        except (FloatingPointError, OverflowError, ValueError) as exc:
            raise MomentOverflowError(f"quotient back-substitution overflows at size {n}") from exc
    return b


def solve_quotient(a: MonicCoefficients, tau: int) -> QuotientCoefficients:
    q = a.q
    if int(tau) != tau or tau < q + 1:
        raise ValueError(f"solve_quotient needs tau >= q + 1 = {q + 1}, got {tau!r}")
    b = _back_substitute(a.a, int(tau) - q + 1)
    b.setflags(write=False)
    return QuotientCoefficients(b, int(tau))


def _alpha_from_quotient(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # alpha_j (1-based) = sum_k b_k a_{j+1-k}; 0-based: alpha[j] = sum_k b[k] a[j-k]
    q = a.size - 1
    alpha = np.empty(q)
    for j in range(q):
        k_max = min(j, b.size - 1)
        alpha[j] = math.fsum(b[: k_max + 1] * a[j - np.arange(k_max + 1)])
    return alpha


def alpha_vector(spectrum: Spectrum, a: MonicCoefficients, tau: int) -> AlphaVector:
    """Coordinates of ``beta^tau`` in the Vandermonde basis, without inverting ``Psi``.

    ``tau < q`` is a unit vector, ``tau == q`` gives ``-a[:q]`` (constant
    quotient ``-1``) and larger ``tau`` goes through :func:`solve_quotient`.
    """
    q = a.q
    if len(spectrum) != q:
        raise ValueError("coefficient vector does not match the spectrum")
    if int(tau) != tau or tau < 0:
        raise ValueError(f"tau must be a nonnegative integer, got {tau!r}")
    tau = int(tau)
    if tau < q:
        alpha = np.zeros(q)
        alpha[tau] = 1.0
    elif tau == q:
        alpha = -np.array(a.a[:q])
    else:
        alpha = _alpha_from_quotient(a.a, solve_quotient(a, tau).b)
    return AlphaVector(alpha, tau)


class _AlphaCache:
    """Alpha components for one spectrum, sharing a single back-substitution.

    The quotient for ``tau`` is the reversal of the first ``tau - q + 1``
    unknowns of the longest system, because every system has the same
    Toeplitz band and the same right-hand side in its last row.
    """

    def __init__(self, spectrum: Spectrum):
        self.spectrum = spectrum
        self.a = monic_coefficients(spectrum)
        self._tail = np.empty(0)  # tail[m] = b_{n-m} of any system of size n > m
        self._alpha: dict[int, np.ndarray] = {}

    def _ensure(self, length: int) -> None:
        if self._tail.size >= length:
            return
        self._tail = _back_substitute(self.a.a, length)[::-1].copy()

    def alpha(self, tau: int) -> np.ndarray:
        if tau in self._alpha:
            return self._alpha[tau]
        q = self.a.q
        if tau <= q:
            out = alpha_vector(self.spectrum, self.a, tau).alpha
        else:
            n = tau - q + 1
            if self._tail.size < n:
                self._ensure(max(n, 2 * self._tail.size))
            b = self._tail[:n][::-1]
            out = _alpha_from_quotient(self.a.a, b)
        if not np.all(np.isfinite(out)):
            raise MomentOverflowError(f"alpha overflow at tau={tau}")
        self._alpha[tau] = out
        return out


def _moment(cache: _AlphaCache, config: EnsembleConfig, p: int) -> float:
    n_t, q = config.n_t, config.q
    if p == 0:
        return 1.0
    terms = []
    for k in range(q - n_t + 1, q + 1):
        try:
            ratio = gamma_ratio_rising(n_t - q + k, p)
        except OverflowError as exc:
            raise MomentOverflowError(str(exc), p=p) from exc
        terms.append(ratio * cache.alpha(p + k - 1)[k - 1])
    try:
        value = math.fsum(terms) / n_t
    except OverflowError as exc:
        raise MomentOverflowError(f"moment of order {p} overflows", p=p) from exc
    if not math.isfinite(value):
        raise MomentOverflowError(f"moment of order {p} overflows", p=p)
    return value


def _check_order(p) -> int:
    if isinstance(p, bool) or int(p) != p or p < 0:
        raise ValueError(f"moment order must be a nonnegative integer, got {p!r}")
    return int(p)


def stable_moment(config: EnsembleConfig, p: int) -> float:
    """``mu(p) = E[lambda^p]`` of an unordered eigenvalue of ``W``.

    Examples
    --------
    >>> from grammoments.spectrum import validate_ensemble
    >>> round(stable_moment(validate_ensemble(2, 3, [1.0, 2.0, 4.0]), 1), 12)
    7.0
    """
    p = _check_order(p)
    try:
        return _moment(_AlphaCache(config.spectrum), config, p)
    except MomentOverflowError as exc:
        exc.p = p
        raise


def stable_moments_upto(config: EnsembleConfig, p_max: int) -> MomentTable:
    """All moments of order ``0..p_max`` with shared coefficient and quotient work."""
    p_max = _check_order(p_max)
    cache = _AlphaCache(config.spectrum)
    moments = {}
    for p in range(p_max + 1):
        try:
            moments[p] = _moment(cache, config, p)
        except MomentOverflowError as exc:
            exc.p = p
            raise
    return MomentTable(moments, "stable")
