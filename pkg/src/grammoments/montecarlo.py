"""Seeded Monte Carlo sampling of Gram matrix eigenvalues.

Realizations are drawn in fixed-size batches. Batch ``j`` gets its own PCG64
stream seeded from ``SeedSequence(seed, spawn_key=(j,))``, so the output
depends only on ``(config, n_samples, seed)`` and not on how batches are
scheduled across workers.
"""

from __future__ import annotations

import csv
import io
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .density import DensityModel, approx_cdf
from .exceptions import SampleFormatError, SpectrumError
from .spectrum import EnsembleConfig

BATCH_SIZE = 8192
MAGIC = b"GRAMEIG1"
_HEADER = struct.Struct("<8sQQ")  # magic, n_samples, n_t -> 24 bytes


@dataclass(frozen=True, eq=False)
class EmpiricalSample:
    """Eigenvalues of ``n_samples`` independent draws of ``W``, flattened realization-major.

    ``config`` and ``seed`` are ``None`` for samples re-imported from disk.
    """

    eigenvalues: np.ndarray
    n_samples: int
    n_t: int
    config: EnsembleConfig | None = None
    seed: int | None = None
    _sorted: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        ev = np.ascontiguousarray(self.eigenvalues, dtype=float)
        if ev.shape != (self.n_samples * self.n_t,):
            raise ValueError(
                f"expected {self.n_samples * self.n_t} eigenvalues, got shape {ev.shape}"
            )
        if np.any(ev < 0.0):
            raise ValueError("eigenvalues of a Gram matrix must be nonnegative")
        ev.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)
        srt = np.sort(ev)
        srt.setflags(write=False)
        object.__setattr__(self, "_sorted", srt)

    @property
    def sorted_eigenvalues(self) -> np.ndarray:
        return self._sorted

    def __len__(self) -> int:
        return self.eigenvalues.size


def _batch(config: EnsembleConfig, seed: int, index: int, count: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))
    q, n_t = config.q, config.n_t
    scale = np.sqrt(0.5)
    x = (rng.standard_normal((count, q, n_t)) + 1j * rng.standard_normal((count, q, n_t))) * scale
    h = np.sqrt(config.spectrum.array)[None, :, None] * x
    w = np.einsum("bki,bkj->bij", h.conj(), h)
    try:
        ev = np.linalg.eigvalsh(w)
    except np.linalg.LinAlgError as exc:
        first = index * BATCH_SIZE
        raise np.linalg.LinAlgError(
            f"eigensolver failed in realizations {first}..{first + count - 1}: {exc}"
        ) from exc
    floor = -1e-10 * config.spectrum.values[-1] * q
    if ev.min() < floor:
        bad = index * BATCH_SIZE + int(np.argmin(ev.min(axis=1)))
        raise np.linalg.LinAlgError(
            f"realization {bad}: eigenvalue {ev.min():.3e} below rounding floor {floor:.3e}"
        )
    return np.maximum(ev, 0.0).ravel()


def sample_eigenvalues(
    config: EnsembleConfig, n_samples: int, seed: int, workers: int = 1
) -> EmpiricalSample:
    """Draw ``n_samples`` realizations of ``W = H^H H`` and keep all their eigenvalues.

    Entries of ``X`` are circular complex Gaussians with real and imaginary
    parts of variance 1/2, so ``E|x|^2 = 1`` and ``E[tr W] / n_t = tr Lambda``.
    """
    if isinstance(n_samples, bool) or int(n_samples) != n_samples or n_samples < 1:
        raise SpectrumError(f"n_samples must be a positive integer, got {n_samples!r}")
    if isinstance(seed, bool) or int(seed) != seed or not 0 <= seed < 2**64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    n_samples, seed = int(n_samples), int(seed)
    counts = [min(BATCH_SIZE, n_samples - start) for start in range(0, n_samples, BATCH_SIZE)]
    jobs = list(enumerate(counts))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _batch(config, seed, *job), jobs))
    else:
        parts = [_batch(config, seed, i, n) for i, n in jobs]
    return EmpiricalSample(np.concatenate(parts), n_samples, config.n_t, config, seed)


def empirical_moment(sample: EmpiricalSample, p: int) -> tuple[float, float]:
    """Sample mean of ``lambda^p`` and its standard error over all stored eigenvalues."""
    if int(p) != p or p < 0:
        raise ValueError(f"moment order must be a nonnegative integer, got {p!r}")
    if p == 0:
        return 1.0, 0.0
    v = sample.eigenvalues ** int(p)
    n = v.size
    se = float(v.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return float(v.mean()), se


def empirical_cdf(sample: EmpiricalSample, lam):
    """Fraction of stored eigenvalues ``<= lam`` (scalar or array)."""
    srt = sample.sorted_eigenvalues
    out = np.searchsorted(srt, np.asarray(lam, dtype=float), side="right") / srt.size
    return float(out) if np.ndim(out) == 0 else out


def ks_distance(model: DensityModel, sample: EmpiricalSample) -> float:
    """Kolmogorov-Smirnov distance between a fitted model CDF and the sample's empirical CDF.

    Both sides of every jump of the empirical step function are compared.
    """
    srt = sample.sorted_eigenvalues
    n = srt.size
    if n == 0:
        raise ValueError("empty sample")
    model_cdf = approx_cdf(model, srt)
    i = np.arange(1, n + 1)
    upper = np.max(i / n - model_cdf)
    lower = np.max(model_cdf - (i - 1) / n)
    return float(max(upper, lower))


# -- export / import ---------------------------------------------------------


def write_binary(sample: EmpiricalSample, fh) -> None:
    fh.write(_HEADER.pack(MAGIC, sample.n_samples, sample.n_t))
    fh.write(sample.eigenvalues.astype("<f8").tobytes())


def read_binary(fh) -> EmpiricalSample:
    head = fh.read(_HEADER.size)
    if len(head) != _HEADER.size:
        raise SampleFormatError("truncated sample header")
    magic, n_samples, n_t = _HEADER.unpack(head)
    if magic != MAGIC:
        raise SampleFormatError(f"bad magic {magic!r}")
    body = fh.read()
    if len(body) != 8 * n_samples * n_t:
        raise SampleFormatError(
            f"header promises {n_samples * n_t} values, body holds {len(body) / 8:g}"
        )
    return EmpiricalSample(np.frombuffer(body, dtype="<f8").astype(float), n_samples, n_t)


def write_csv(sample: EmpiricalSample, fh) -> None:
    writer = csv.writer(fh, lineterminator="\r\n")
    writer.writerow(["realization", "eigenvalue"])
    reps = np.repeat(np.arange(sample.n_samples), sample.n_t)
    for r, v in zip(reps.tolist(), sample.eigenvalues.tolist()):
        writer.writerow([r, repr(v)])


def read_csv(fh) -> EmpiricalSample:
    reader = csv.reader(fh)
    header = next(reader, None)
    if header != ["realization", "eigenvalue"]:
        raise SampleFormatError(f"unexpected CSV header {header!r}")
    reps, vals = [], []
    for row in reader:
        if not row:
            continue
        try:
            reps.append(int(row[0]))
            vals.append(float(row[1]))
        except (ValueError, IndexError) as exc:
            raise SampleFormatError(f"bad CSV row {row!r}") from exc
    if not reps:
        raise SampleFormatError("CSV sample has no rows")
    n_samples = reps[-1] + 1
    if len(vals) % n_samples:
        raise SampleFormatError("rows do not split evenly into realizations")
    return EmpiricalSample(np.array(vals), n_samples, len(vals) // n_samples)


def save_sample(sample: EmpiricalSample, path: str | Path, fmt: str = "bin") -> None:
    path = Path(path)
    if fmt == "bin":
        with path.open("wb") as fh:
            write_binary(sample, fh)
    elif fmt == "csv":
        with path.open("w", newline="") as fh:
            write_csv(sample, fh)
    else:
        raise ValueError(f"unknown sample format {fmt!r}")


def load_sample(path: str | Path) -> EmpiricalSample:
    """Re-import a sample written by :func:`save_sample`, detecting the format from its first bytes."""
    path = Path(path)
    with path.open("rb") as fh:
        start = fh.read(len(MAGIC))
    if start == MAGIC:
        with path.open("rb") as fh:
            return read_binary(fh)
    with path.open("r", newline="") as fh:
        return read_csv(io.StringIO(fh.read()))
