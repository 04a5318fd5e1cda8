"""Correlation spectra and Gram ensemble configurations.

The ensemble is ``H = Lambda^(1/2) X`` with ``X`` a ``q x n_t`` matrix of
i.i.d. unit-variance circular complex Gaussians and ``W = H^H H``. Only the
eigenvalues of ``Lambda`` matter, so a configuration is the pair of
dimensions plus the spectrum.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .exceptions import SpectrumError

#: Relative gap below which two eigenvalues are treated as coincident.
DUPLICATE_RTOL = 1e-14


@dataclass(frozen=True)
class Spectrum:
    """Distinct, strictly positive eigenvalues stored in ascending order.

    Construction sorts the input and rejects non-finite, non-positive or
    (numerically) repeated values.
    """

    values: tuple[float, ...]

    def __init__(self, values: Iterable[float]):
        vals = sorted(float(v) for v in values)
        if not vals:
            raise SpectrumError("spectrum must contain at least one eigenvalue")
        for v in vals:
            if not math.isfinite(v):
                raise SpectrumError(f"non-finite eigenvalue {v!r}")
            if v <= 0.0:
                raise SpectrumError(f"eigenvalues must be strictly positive, got {v!r}")
        for lo, hi in zip(vals, vals[1:]):
            if hi - lo <= DUPLICATE_RTOL * hi:
                raise SpectrumError(
                    f"duplicate eigenvalues {lo!r} and {hi!r} "
                    f"(relative gap below {DUPLICATE_RTOL:g})"
                )
        object.__setattr__(self, "values", tuple(vals))

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    @property
    def q(self) -> int:
        return len(self.values)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    @property
    def trace(self) -> float:
        return math.fsum(self.values)

    def min_relative_gap(self) -> float:
        """Smallest gap between neighbours divided by the largest eigenvalue."""
        if len(self.values) < 2:
            return math.inf
        gaps = np.diff(self.array)
        return float(gaps.min() / self.values[-1])


@dataclass(frozen=True)
class EnsembleConfig:
    n_t: int
    q: int
    spectrum: Spectrum

    def __post_init__(self):
        if self.n_t < 1 or self.q < 1:
            raise SpectrumError(f"dimensions must be positive, got n_t={self.n_t}, q={self.q}")
        if self.n_t > self.q:
            raise SpectrumError(f"need n_t <= q, got n_t={self.n_t} > q={self.q}")
        if len(self.spectrum) != self.q:
            raise SpectrumError(
                f"spectrum has {len(self.spectrum)} eigenvalues but q={self.q}"
            )


def exponential_spectrum(q: int, xi: float) -> Spectrum:
    """Eigenvalues ``(1 - xi) * xi**k``, ``k = 0..q-1``, of the forgetting-factor model.

    Parameters
    ----------
    q : int
        Number of eigenvalues (row dimension of ``H``).
    xi : float
        Forgetting factor, strictly inside ``(0, 1)`` so the values are distinct.
    """
    if isinstance(q, bool) or int(q) != q or q < 1:
        raise SpectrumError(f"q must be a positive integer, got {q!r}")
    xi = float(xi)
    if not 0.0 < xi < 1.0:
        raise SpectrumError(f"forgetting factor must lie in (0, 1), got {xi!r}")
    return Spectrum((1.0 - xi) * xi**k for k in range(int(q)))


def validate_ensemble(n_t: int, q: int, spectrum: Spectrum | Sequence[float]) -> EnsembleConfig:
    """Check dimensions and eigenvalues, returning an immutable configuration."""
    for name, v in (("n_t", n_t), ("q", q)):
        if isinstance(v, bool) or int(v) != v:
            raise SpectrumError(f"{name} must be an integer, got {v!r}")
    if not isinstance(spectrum, Spectrum):
        spectrum = Spectrum(spectrum)
    return EnsembleConfig(int(n_t), int(q), spectrum)


def load_spectrum(path: str | Path) -> Spectrum:
    """Read a spectrum from a JSON array or a text file with one value per line."""
    text = Path(path).read_text()
    stripped = text.strip()
    try:
        if stripped.startswith("["):
            values = json.loads(stripped)
            if not isinstance(values, list):
                raise SpectrumError(f"{path}: expected a JSON array of numbers")
        else:
            values = [
                float(line) for line in stripped.splitlines()
                if line.strip() and not line.lstrip().startswith("#")
            ]
        values = [float(v) for v in values]
    except (ValueError, TypeError) as exc:
        if isinstance(exc, SpectrumError):
            raise
        raise SpectrumError(f"{path}: cannot parse eigenvalues ({exc})") from exc
    return Spectrum(values)
