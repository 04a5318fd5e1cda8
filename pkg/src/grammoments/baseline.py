"""Closed-form marginal PDF, CDF and moments through an explicit Vandermonde inverse.

This is the classical route: every quantity needs ``Psi^{-1}`` where
``Psi[m, n] = beta_m ** n``. It is exact in exact arithmetic and fine for
well separated spectra, but ``Psi`` becomes numerically singular for
clustered eigenvalues, which is what :mod:`grammoments.stable` avoids.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import linalg

from .exceptions import InstabilityWarning, SingularMatrixError
from .special import gamma_ratio_rising, regularized_lower_gamma
from .spectrum import EnsembleConfig, Spectrum

#: One-norm condition number above which baseline results are flagged.
CONDITION_WARN = 1e12


@dataclass(frozen=True, eq=False)
class VandermondeSystem:
    """Vandermonde matrix of a spectrum with its computed inverse.

    Attributes
    ----------
    psi : ndarray, shape (q, q)
        ``psi[m, n] = beta_m ** n``.
    inverse : ndarray, shape (q, q)
        Columns are solutions of ``psi x = e_j`` from a partially pivoted LU.
    condition_estimate : float
        ``||psi||_1 * ||inverse||_1``.
    residual : float
        ``max |psi @ inverse - I|``, recorded rather than assumed small.
    """

    psi: np.ndarray
    inverse: np.ndarray
    condition_estimate: float
    residual: float

    @property
    def unstable(self) -> bool:
        return not self.condition_estimate <= CONDITION_WARN


def build_vandermonde(spectrum: Spectrum) -> VandermondeSystem:
    return _build_cached(spectrum)


@lru_cache(maxsize=64)
def _build_cached(spectrum: Spectrum) -> VandermondeSystem:
    beta = spectrum.array
    q = beta.size
    psi = np.vander(beta, q, increasing=True)
    lu, piv = linalg.lu_factor(psi, check_finite=True)
    diag = np.diag(lu)
    if np.any(diag == 0.0):
        j = int(np.flatnonzero(diag == 0.0)[0])
        raise SingularMatrixError(f"exactly zero pivot at position {j} in Vandermonde factorization")
    inverse = linalg.lu_solve((lu, piv), np.eye(q))
    cond = float(np.linalg.norm(psi, 1) * np.linalg.norm(inverse, 1))
    if not math.isfinite(cond):
        cond = math.inf
    residual = float(np.max(np.abs(psi @ inverse - np.eye(q))))
    psi.setflags(write=False)
    inverse.setflags(write=False)
    return VandermondeSystem(psi, inverse, max(cond, 1.0), residual)


def _system(config: EnsembleConfig) -> VandermondeSystem:
    system = build_vandermonde(config.spectrum)
    if system.unstable:
        warnings.warn(
            f"Vandermonde condition estimate {system.condition_estimate:.3e} exceeds "
            f"{CONDITION_WARN:.0e}; baseline values are unreliable",
            InstabilityWarning,
            stacklevel=3,
        )
    return system


def _orders(config: EnsembleConfig) -> range:
    # 1-based row indices k of Psi^{-1} that enter the closed forms
    return range(config.q - config.n_t + 1, config.q + 1)


def baseline_moment(config: EnsembleConfig, p: int) -> float:
    """Moment ``E[lambda^p]`` from the closed form with an explicit ``Psi^{-1}``."""
    if int(p) != p or p < 0:
        raise ValueError(f"moment order must be a nonnegative integer, got {p!r}")
    system = _system(config)
    beta = config.spectrum.array
    n_t, q = config.n_t, config.q
    total = []
    for k in _orders(config):
        ratio = gamma_ratio_rising(n_t - q + k, p)
        total.append(ratio * math.fsum(system.inverse[k - 1] * beta ** (p + k - 1)))
    return math.fsum(total) / n_t


def baseline_pdf(config: EnsembleConfig, lam):
    """Marginal density of an unordered eigenvalue of ``W`` (scalar or array ``lam``)."""
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr < 0.0):
        raise ValueError("baseline_pdf is defined for lambda >= 0")
    system = _system(config)
    beta = config.spectrum.array
    n_t, q = config.n_t, config.q
    x = lam_arr[..., None]
    out = np.zeros(lam_arr.shape)
    for k in _orders(config):
        m = n_t - q + k  # power of lambda is m - 1 >= 0
        coef = system.inverse[k - 1] * beta ** (q - n_t - 1) / math.gamma(m)
        out = out + np.sum(coef * x ** (m - 1) * np.exp(-x / beta), axis=-1)
    out = out / n_t
    return float(out) if out.ndim == 0 else out


def baseline_cdf(config: EnsembleConfig, lam):
    """Marginal CDF through regularized lower incomplete gamma functions."""
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr < 0.0):
        raise ValueError("baseline_cdf is defined for lambda >= 0")
    system = _system(config)
    beta = config.spectrum.array
    n_t, q = config.n_t, config.q
    x = lam_arr[..., None]
    out = np.zeros(lam_arr.shape)
    for k in _orders(config):
        coef = system.inverse[k - 1] * beta ** (k - 1)
        out = out + np.sum(coef * regularized_lower_gamma(n_t - q + k, x / beta), axis=-1)
    out = out / n_t
    return float(out) if out.ndim == 0 else out
