"""Command-line front end.

Every run is described by a :class:`RunConfig`; commands build their whole
table in memory and only then write it, so a failure never leaves a partial
artifact behind.

Examples::

    grammoments moments --nt 3 --q 20 --xi 0.85 --p 1,5,8
    grammoments compare --nt 3 --q 5 --xi 0.85 --p 0,1,5,8 --samples 100000 --seed 7
    grammoments density --nt 3 --q 20 --xi 0.85 --K 45 --samples 100000 --format json
    grammoments sample --nt 3 --q 5 --xi 0.85 --samples 10 --seed 42 --format bin --out s.bin
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .baseline import CONDITION_WARN, baseline_moment, build_vandermonde
from .density import evaluate_density, fit_density
from .exceptions import GramMomentsError, InstabilityWarning
from .montecarlo import (
    empirical_cdf,
    empirical_moment,
    ks_distance,
    sample_eigenvalues,
    write_binary,
    write_csv,
)
from .spectrum import EnsembleConfig, exponential_spectrum, load_spectrum, validate_ensemble
from .stable import stable_moments_upto

COMMANDS = ("moments", "density", "compare", "sample")


class UsageError(GramMomentsError, ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    n_t: int
    q: int | None = None
    xi: float | None = None
    spectrum_path: str | None = None
    p_list: tuple[int, ...] = ()
    K: int | None = None
    n_samples: int = 0
    seed: int = 0
    grid: tuple[float, float, int] | None = None
    output_format: str = "csv"
    output_path: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if (self.xi is None) == (self.spectrum_path is None):
            raise UsageError("give exactly one of --xi or --spectrum")
        if self.xi is not None and self.q is None:
            raise UsageError("--q is required with --xi")
        if self.command in ("moments", "compare") and not self.p_list:
            raise UsageError(f"{self.command} needs a nonempty --p list")
        if any(p < 0 for p in self.p_list):
            raise UsageError("moment orders must be nonnegative")
        if self.command == "density" and (self.K is None or self.K < 0):
            raise UsageError("density needs --K >= 0")
        if self.command in ("compare", "sample") and self.n_samples < 1:
            raise UsageError(f"{self.command} needs --samples >= 1")
        if self.n_samples < 0:
            raise UsageError("--samples must be nonnegative")
        if not 0 <= self.seed < 2**64:
            raise UsageError("--seed must be an unsigned 64-bit integer")
        fmts = ("csv", "bin") if self.command == "sample" else ("csv", "json")
        if self.output_format not in fmts:
            raise UsageError(f"{self.command} supports --format {'/'.join(fmts)}")

    def ensemble(self) -> EnsembleConfig:
        if self.xi is not None:
            spectrum = exponential_spectrum(self.q, self.xi)
        else:
            spectrum = load_spectrum(self.spectrum_path)
            if self.q is not None and self.q != len(spectrum):
                raise UsageError(f"--q {self.q} disagrees with {len(spectrum)} eigenvalues in file")
        return validate_ensemble(self.n_t, len(spectrum), spectrum)


# -- emission ---------------------------------------------------------------


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def _json_value(v):
    if v is None:
        return None
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(v)
    return v if math.isfinite(v) else None


def render_table(columns: dict[str, list], meta: dict, fmt: str) -> str:
    """Serialize columnar data as RFC-4180 CSV (17 significant digits) or JSON."""
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(list(columns))
        for row in zip(*columns.values()):
            writer.writerow([_csv_cell(v) for v in row])
        return buf.getvalue()
    doc = {
        "meta": meta,
        "data": {k: [_json_value(v) for v in vals] for k, vals in columns.items()},
    }
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def _write(payload: bytes, path: str | None) -> None:
    if path is None:
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()
        return
    target = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(dir=target.parent if str(target.parent) else ".", prefix=".tmp-")
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, target)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _meta(rc: RunConfig, **extra) -> dict:
    meta = {"run": asdict(rc), "version": __version__, "seed": rc.seed}
    meta.update(extra)
    return meta


def _report(diag: dict) -> None:
    for k, v in diag.items():
        print(f"# {k}: {v}", file=sys.stderr)


# -- commands ---------------------------------------------------------------


def _baseline_column(config: EnsembleConfig, orders):
    """Baseline moments plus instability flags; ``None`` entries when the solve is singular."""
    try:
        system = build_vandermonde(config.spectrum)
    except GramMomentsError as exc:
        return [None] * len(orders), [None] * len(orders), {"baseline_omitted": str(exc)}
    flag = not system.condition_estimate <= CONDITION_WARN
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", InstabilityWarning)
        values = [baseline_moment(config, p) for p in orders]
    diag = {"baseline_condition_estimate": system.condition_estimate}
    return values, [flag] * len(orders), diag


def cmd_moments(rc: RunConfig) -> tuple[bytes, dict]:
    config = rc.ensemble()
    orders = list(rc.p_list)
    table = stable_moments_upto(config, max(orders))
    baseline, flags, diag = _baseline_column(config, orders)
    columns = {"p": orders, "stable": [table[p] for p in orders]}
    if "baseline_omitted" not in diag:
        columns["baseline"] = baseline
        columns["baseline_condition_warning"] = flags
    text = render_table(columns, _meta(rc, diagnostics=diag), rc.output_format)
    return text.encode(), diag


def cmd_compare(rc: RunConfig) -> tuple[bytes, dict]:
    config = rc.ensemble()
    orders = list(rc.p_list)
    table = stable_moments_upto(config, max(orders))
    baseline, flags, diag = _baseline_column(config, orders)
    sample = sample_eigenvalues(config, rc.n_samples, rc.seed)
    emp = [empirical_moment(sample, p) for p in orders]
    columns = {
        "p": orders,
        "baseline": baseline,
        "baseline_condition_warning": flags,
        "empirical": [e for e, _ in emp],
        "empirical_stderr": [s for _, s in emp],
        "stable": [table[p] for p in orders],
    }
    text = render_table(columns, _meta(rc, diagnostics=diag), rc.output_format)
    return text.encode(), diag


def _histogram_density(values: np.ndarray, grid: np.ndarray) -> np.ndarray:
    if grid.size < 2:
        return np.full(grid.shape, np.nan)
    mids = 0.5 * (grid[1:] + grid[:-1])
    edges = np.concatenate([[max(0.0, 2 * grid[0] - mids[0])], mids, [2 * grid[-1] - mids[-1]]])
    counts, _ = np.histogram(values, bins=edges)
    return counts / (values.size * np.diff(edges))


def cmd_density(rc: RunConfig) -> tuple[bytes, dict]:
    config = rc.ensemble()
    table = stable_moments_upto(config, max(rc.K, 2))
    model = fit_density(table, rc.K)
    if rc.grid is None:
        grid = model.default_grid()
    else:
        lo, hi, n = rc.grid
        grid = np.linspace(lo, hi, n)
    ev = evaluate_density(model, grid)
    diag = {
        "c": model.c,
        "nu": model.nu,
        "min_pdf": ev.min_pdf,
        "cdf_excursion": ev.cdf_excursion,
        "cdf_max_decrease": ev.cdf_max_decrease,
    }
    columns = {
        "lambda": grid.tolist(),
        "pdf": np.maximum(ev.pdf, 0.0).tolist(),
        "cdf": np.asarray(ev.cdf).tolist(),
    }
    if rc.n_samples > 0:
        sample = sample_eigenvalues(config, rc.n_samples, rc.seed)
        columns["empirical_pdf"] = _histogram_density(sample.eigenvalues, grid).tolist()
        columns["empirical_cdf"] = np.asarray(empirical_cdf(sample, grid)).tolist()
        diag["ks_distance"] = ks_distance(model, sample)
    meta = _meta(rc, diagnostics=diag, delta=model.delta.tolist())
    return render_table(columns, meta, rc.output_format).encode(), diag


def cmd_sample(rc: RunConfig) -> tuple[bytes, dict]:
    config = rc.ensemble()
    sample = sample_eigenvalues(config, rc.n_samples, rc.seed)
    if rc.output_format == "bin":
        buf = io.BytesIO()
        write_binary(sample, buf)
        return buf.getvalue(), {}
    sbuf = io.StringIO()
    write_csv(sample, sbuf)
    return sbuf.getvalue().encode(), {}


HANDLERS = {
    "moments": cmd_moments,
    "density": cmd_density,
    "compare": cmd_compare,
    "sample": cmd_sample,
}


# -- argument parsing -------------------------------------------------------


def _p_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _grid(text: str) -> tuple[float, float, int]:
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected MIN:MAX:POINTS, got {text!r}")
    if not (0.0 <= lo < hi) or n < 2:
        raise argparse.ArgumentTypeError("grid needs 0 <= MIN < MAX and POINTS >= 2")
    return lo, hi, n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grammoments",
        description="Moments and eigenvalue density of one-side correlated Gram matrices.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--nt", type=int, required=True, help="columns of H (number of eigenvalues of W)")
        p.add_argument("--q", type=int, help="rows of H (size of the correlation matrix)")
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--xi", type=float, help="forgetting factor of the exponential model")
        src.add_argument("--spectrum", help="JSON array or one-per-line text file of eigenvalues")
        p.add_argument("--p", type=_p_list, default=(), help="comma-separated moment orders")
        p.add_argument("--K", type=int, help="Laguerre truncation order")
        p.add_argument("--samples", type=int, default=0, help="Monte Carlo realizations")
        p.add_argument("--seed", type=int, default=0, help="unsigned 64-bit seed")
        p.add_argument("--grid", type=_grid, help="MIN:MAX:POINTS evaluation grid")
        fmts = ["csv", "bin"] if name == "sample" else ["csv", "json"]
        p.add_argument("--format", choices=fmts, default="csv")
        p.add_argument("--out", help="output path (default stdout)")
    return parser


def parse_run_config(argv=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    return RunConfig(
        command=args.command,
        n_t=args.nt,
        q=args.q,
        xi=args.xi,
        spectrum_path=args.spectrum,
        p_list=args.p,
        K=args.K,
        n_samples=args.samples,
        seed=args.seed,
        grid=args.grid,
        output_format=args.format,
        output_path=args.out,
    )


def main(argv=None) -> int:
    try:
        rc = parse_run_config(argv)
        payload, diag = HANDLERS[rc.command](rc)
    except (GramMomentsError, ValueError, OverflowError, OSError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if rc.output_format == "csv" and diag:
        _report(diag)
    try:
        _write(payload, rc.output_path)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
