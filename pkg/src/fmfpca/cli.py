"""Command-line surface.

Thin adapter over the library: loads wide-format CSV data, resolves a run
configuration from an optional flat ``key = value`` config file plus flag
overrides (flags win), dispatches to the estimators/tests, and emits JSON
reports or delimited tables. No statistic is computed here.

Wide format: the first row holds the grid abscissae, each subsequent row one
observation's values at those points.
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import critsim, dgp
from .cointtest import (
    attractor_in_subspace_test,
    sequential_dimension,
    subspace_in_attractor_test,
)
from .errors import (
    ConfigError,
    EmptyFile,
    FmfpcaError,
    MissingCriticalValues,
    NonMonotoneGrid,
    NotOrthonormal,
    RaggedRows,
)
from .fpca import DeterministicMode, FunctionalSeries
from .hilbert import Grid, GridFunction
from .lrcov import KernelSpec
from .modified import modified_fpca
from .transforms import DensityFunction, clr_transform, inverse_clr, logit_curve

__all__ = ["main", "load_series", "RunConfig"]

_DEFAULT_LEVELS = (0.95, 0.99)
_CV_REPS_FLOOR = 1000


def load_series(path) -> FunctionalSeries:
    """Read a wide-format CSV file into a functional series.

    Rows are numbered from 1 including the header; a ragged row is reported
    with its file row number.
    """
    text = Path(path).read_text(encoding="utf-8")
    rows = [line.strip() for line in text.splitlines() if line.strip()]
    if not rows:
        raise EmptyFile(f"{path} contains no data")
    parsed = []
    for i, row in enumerate(rows, start=1):
        try:
            parsed.append([float(cell) for cell in row.split(",")])
        except ValueError as exc:
            raise FmfpcaError(f"row {i} of {path} is not numeric: {exc}") from None
    header = parsed[0]
    if len(parsed) < 2:
        raise EmptyFile(f"{path} has a grid header but no observations")
    if any(b <= a for a, b in zip(header, header[1:])):
        raise NonMonotoneGrid(f"grid header of {path} is not strictly increasing")
    for i, row in enumerate(parsed[1:], start=2):
        if len(row) != len(header):
            raise RaggedRows(
                f"row {i} of {path} has {len(row)} cells, expected {len(header)}",
                row=i,
            )
    grid = Grid.trapezoid(np.asarray(header))
    return FunctionalSeries(grid, np.asarray(parsed[1:]))


def _write_wide(path_or_none, grid: Grid, values: np.ndarray) -> str:
    lines = [",".join(f"{x:.17g}" for x in grid.points)]
    for row in np.atleast_2d(values):
        lines.append(",".join(f"{x:.17g}" for x in row))
    text = "\n".join(lines) + "\n"
    if path_or_none:
        Path(path_or_none).write_text(text, encoding="utf-8")
    return text


@dataclass
class RunConfig:
    """Validated run parameters shared by the commands."""

    command: str = ""
    input: str | None = None
    subspace: str | None = None
    mode: str = "none"
    kernel: str = "parzen"
    h: str = "t13"
    k_policy: int = 1
    alpha: float = 0.05
    phi: int | None = None
    phi0: str = "0"
    phi0_max: int = 2
    t: str | None = None
    seed: int = 0
    cv_cache: str | None = None
    simulate_cv: bool = False
    reps: int = 20000
    ngrid: int = 1000
    levels: str = "0.95,0.99"
    allow_small: bool = False
    n_reps: int = 500
    grid_size: int = 201
    beta_min: float = 0.0
    beta_max: float = 0.5
    kind: str | None = None
    format: str = "json"
    out: str | None = None

    def deterministic_mode(self) -> DeterministicMode:
        return DeterministicMode.parse(self.mode)

    def kernel_spec(self) -> KernelSpec:
        return KernelSpec.parse(self.kernel)

    def parsed_levels(self) -> tuple:
        values = tuple(float(x) for x in str(self.levels).split(","))
        if any(not 0.0 < v < 1.0 for v in values):
            raise ConfigError("levels must lie strictly inside (0, 1)")
        return values

    def int_list(self, raw: str | None, what: str) -> list:
        if raw is None:
            raise ConfigError(f"{what} is required")
        try:
            return [int(x) for x in str(raw).split(",")]
        except ValueError:
            raise ConfigError(f"{what} must be a comma-separated integer list") from None


_BOOL_FIELDS = {"simulate_cv", "allow_small"}


def _read_config_file(path) -> dict:
    known = {f.name for f in fields(RunConfig)} - {"command"}
    out = {}
    for i, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {i} of {path} is not 'key = value'")
        key, _, value = stripped.partition("=")
        key = key.strip().replace("-", "_")
        if key not in known:
            raise ConfigError(f"unknown configuration key {key!r} (line {i})")
        value = value.strip()
        if key in _BOOL_FIELDS:
            out[key] = value.lower() in {"1", "true", "yes", "on"}
        else:
            out[key] = value
    return out


def _merge_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        values.update(_read_config_file(args.config))
    for f in fields(RunConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            values[f.name] = flag
    cfg = RunConfig(**values)
    # coerce strings arriving from the config file to field types
    for f in fields(RunConfig):
        raw = getattr(cfg, f.name)
        if raw is None or not isinstance(raw, str):
            continue
        if f.type in ("int", "int | None"):
            setattr(cfg, f.name, int(raw))
        elif f.type == "float":
            setattr(cfg, f.name, float(raw))
    if cfg.format not in {"json", "csv"}:
        raise ConfigError("format must be 'json' or 'csv'")
    return cfg


class _CvProvider:
    """Critical-value lookups backed by a cache file and optional simulation.

    Missing table cells are simulated on demand (when enabled) with the run's
    reps/ngrid/seed; each cell's draws come from substreams keyed by the cell,
    so lazily simulated values match a bulk run with the same parameters.
    """

    def __init__(self, cfg: RunConfig):
        self.tables = []
        if cfg.cv_cache and Path(cfg.cv_cache).exists():
            self.tables.append(critsim.CriticalValueTable.load(cfg.cv_cache))
        self.simulate = bool(cfg.simulate_cv)
        self.levels = cfg.parsed_levels()
        self.reps = cfg.reps
        self.ngrid = cfg.ngrid
        self.seed = cfg.seed
        self._fresh = None

    def lookup(self, mode, dim_w, dim_b):
        for table in self.tables:
            try:
                return table.lookup(mode, dim_w, dim_b)
            except MissingCriticalValues:
                continue
        if not self.simulate:
            raise MissingCriticalValues(
                f"no critical values cached for mode={DeterministicMode.parse(mode).value}, "
                f"dim_w={dim_w}, dim_b={dim_b}; pass --simulate-cv or run simulate-cv"
            )
        fresh = critsim.critical_values(
            [(dim_w, dim_b)], mode, self.levels, self.reps, self.ngrid, self.seed
        )
        if self._fresh is None:
            self._fresh = fresh
            self.tables.append(fresh)
        else:
            self._fresh.merge(fresh)
        return self._fresh.lookup(mode, dim_w, dim_b)


def _report(cfg: RunConfig, payload: dict) -> dict:
    payload["generated_at"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    return payload


def _emit(cfg: RunConfig, payload, csv_text: str | None = None) -> None:
    if cfg.format == "csv" and csv_text is not None:
        text = csv_text
    else:
        text = json.dumps(payload, indent=2) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_subspace(cfg: RunConfig, grid: Grid) -> list:
    if not cfg.subspace:
        raise ConfigError("--subspace is required for subspace tests")
    m_series = load_series(cfg.subspace)
    grid.require_compatible(m_series.grid)
    coords = m_series.coords.T
    gram = coords.T @ coords
    cond = np.linalg.cond(gram)
    if cond > 1e6:
        raise NotOrthonormal(
            f"subspace curves are too collinear (Gram condition {cond:.2e})"
        )
    q, _ = np.linalg.qr(coords)
    return [GridFunction.from_coords(grid, q[:, j]) for j in range(q.shape[1])]


def cmd_test_dim(cfg: RunConfig) -> None:
    series = load_series(cfg.input) if cfg.input else _missing_input()
    provider = _CvProvider(cfg)
    h = dgp.resolve_bandwidth(cfg.h, len(series))
    result = sequential_dimension(
        series,
        alpha=cfg.alpha,
        K_policy=cfg.k_policy,
        spec=cfg.kernel_spec(),
        h=h,
        mode=cfg.deterministic_mode(),
        cvt=provider,
    )
    payload = _report(
        cfg,
        {
            "command": "test-dim",
            "input": cfg.input,
            "T": len(series),
            "grid_size": len(series.grid),
            "mode": cfg.mode,
            "kernel": cfg.kernel,
            "h": cfg.h,
            "bandwidth": h,
            "k_policy": cfg.k_policy,
            "alpha": cfg.alpha,
            "phi_hat": result.phi_hat,
            "cap_reached": result.cap_reached,
            "tests": [o.summary() for o in result.trajectory],
        },
    )
    csv_lines = ["phi0,K,statistic," + ",".join(
        f"cv_{a:g},reject_{a:g}" for a in sorted(result.trajectory[0].critical_values)
    )]
    for o in result.trajectory:
        cells = [str(o.phi0), str(o.K), f"{o.statistic:.6f}"]
        for a in sorted(o.critical_values):
            cells += [f"{o.critical_values[a]:.6f}", str(int(o.reject[a]))]
        csv_lines.append(",".join(cells))
    _emit(cfg, payload, "\n".join(csv_lines) + "\n")


def _missing_input():
    raise ConfigError("--input is required")


def cmd_estimate(cfg: RunConfig) -> None:
    series = load_series(cfg.input) if cfg.input else _missing_input()
    if cfg.phi is None:
        raise ConfigError("--phi is required for estimation")
    h = dgp.resolve_bandwidth(cfg.h, len(series))
    result = modified_fpca(
        series, cfg.phi, cfg.kernel_spec(), h, cfg.deterministic_mode()
    )
    n_spectrum = min(len(series.grid), 20)
    basis = [list(v.values) for v in result.spectrum.eigenvectors[: cfg.phi]]
    payload = _report(
        cfg,
        {
            "command": "estimate",
            "input": cfg.input,
            "T": len(series),
            "grid_size": len(series.grid),
            "mode": cfg.mode,
            "kernel": cfg.kernel,
            "h": cfg.h,
            "bandwidth": h,
            "phi": cfg.phi,
            "eigenvalues": list(result.spectrum.eigenvalues[:n_spectrum]),
            "grid": list(series.grid.points),
            "attractor_basis": basis,
        },
    )
    csv_text = _write_wide(
        None,
        series.grid,
        np.asarray(basis) if basis else np.zeros((0, len(series.grid))),
    )
    _emit(cfg, payload, csv_text)


def cmd_simulate_cv(cfg: RunConfig) -> None:
    if cfg.reps < _CV_REPS_FLOOR and not cfg.allow_small:
        raise ConfigError(
            f"reps={cfg.reps} is below the table-production floor "
            f"{_CV_REPS_FLOOR}; pass --allow-small to override"
        )
    dims = [(cfg.k_policy, phi0) for phi0 in range(cfg.phi0_max + 1)]
    table = critsim.critical_values(
        dims,
        cfg.deterministic_mode(),
        cfg.parsed_levels(),
        cfg.reps,
        cfg.ngrid,
        cfg.seed,
    )
    target = cfg.out or cfg.cv_cache
    if not target:
        raise ConfigError("give --out or --cv-cache to store the table")
    table.save(target)
    sys.stdout.write(
        json.dumps(
            {
                "command": "simulate-cv",
                "out": str(target),
                "cells": len(table.entries),
                "gram_retries": getattr(table, "gram_retries", 0),
            }
        )
        + "\n"
    )


def cmd_montecarlo(cfg: RunConfig) -> None:
    if cfg.phi is None:
        raise ConfigError("--phi (true dimension) is required")
    t_values = cfg.int_list(cfg.t, "--t")
    phi0_values = cfg.int_list(cfg.phi0, "--phi0")
    provider = _CvProvider(cfg)
    rows = [dgp.EXPERIMENT_HEADER]
    for t in t_values:
        for phi0 in phi0_values:
            sim = dgp.DgpConfig(
                phi=cfg.phi,
                T=t,
                grid_size=cfg.grid_size,
                beta_range=(cfg.beta_min, cfg.beta_max),
                deterministic=cfg.deterministic_mode(),
                seed=cfg.seed,
            )
            rate = dgp.rejection_experiment(
                sim,
                phi0,
                cfg.k_policy,
                cfg.kernel_spec(),
                cfg.h,
                cfg.alpha,
                cfg.n_reps,
                provider,
            )
            rows.append(
                dgp.experiment_row(
                    sim, phi0, cfg.k_policy, cfg.h, cfg.alpha, cfg.n_reps, rate
                )
            )
    text = "\n".join(rows) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_test_subspace(cfg: RunConfig, contains: bool) -> None:
    series = load_series(cfg.input) if cfg.input else _missing_input()
    m = _load_subspace(cfg, series.grid)
    provider = _CvProvider(cfg)
    h = dgp.resolve_bandwidth(cfg.h, len(series))
    if contains:
        outcome = attractor_in_subspace_test(
            series, m, cfg.k_policy, cfg.kernel_spec(), h,
            cfg.deterministic_mode(), provider,
        )
        command = "test-subspace-contains"
    else:
        if cfg.phi is None:
            raise ConfigError("--phi (trend dimension) is required for this test")
        phi0 = cfg.phi - len(m)
        outcome = subspace_in_attractor_test(
            series, m, cfg.phi, phi0 + cfg.k_policy, cfg.kernel_spec(), h,
            cfg.deterministic_mode(), provider,
        )
        command = "test-subspace-in"
    payload = _report(
        cfg,
        {
            "command": command,
            "input": cfg.input,
            "subspace": cfg.subspace,
            "subspace_dim": len(m),
            "T": len(series),
            "mode": cfg.mode,
            "kernel": cfg.kernel,
            "h": cfg.h,
            "bandwidth": h,
            "alpha": cfg.alpha,
            "test": outcome.summary(),
        },
    )
    _emit(cfg, payload)


def cmd_transform(cfg: RunConfig) -> None:
    if cfg.kind not in {"logit", "clr", "inverse-clr"}:
        raise ConfigError("--kind must be one of logit, clr, inverse-clr")
    series = load_series(cfg.input) if cfg.input else _missing_input()
    rows = []
    for f in series:
        if cfg.kind == "logit":
            rows.append(logit_curve(f).values)
        elif cfg.kind == "clr":
            rows.append(clr_transform(DensityFunction(f.grid, f.values)).values)
        else:
            rows.append(inverse_clr(f).values)
    text = _write_wide(cfg.out, series.grid, np.vstack(rows))
    if not cfg.out:
        sys.stdout.write(text)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fmfpca",
        description=(
            "Trend-subspace estimation and cointegration tests for functional "
            "time series"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="flat key = value configuration file")
        p.add_argument("--input", help="wide-format CSV data file")
        p.add_argument("--mode", choices=["none", "const", "trend"])
        p.add_argument("--kernel", choices=["parzen", "bartlett", "flat"])
        p.add_argument("--h", help="bandwidth: t13, t25, or a number")
        p.add_argument("--k-policy", dest="k_policy", type=int)
        p.add_argument("--alpha", type=float)
        p.add_argument("--phi", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--cv-cache", dest="cv_cache")
        p.add_argument(
            "--simulate-cv", dest="simulate_cv", action="store_const", const=True
        )
        p.add_argument("--reps", type=int, help="critical-value simulation draws")
        p.add_argument("--ngrid", type=int, help="path discretization steps")
        p.add_argument("--levels", help="comma-separated quantile levels")
        p.add_argument("--format", choices=["json", "csv"])
        p.add_argument("--out")
        return p

    add_common(sub.add_parser("test-dim", help="sequential trend-dimension test"))

    p = add_common(sub.add_parser("test-subspace-in", help="is span(M) inside the trend space?"))
    p.add_argument("--subspace", help="wide CSV of curves spanning M")

    p = add_common(sub.add_parser("test-subspace-contains", help="does span(M) contain the trend space?"))
    p.add_argument("--subspace", help="wide CSV of curves spanning M")

    add_common(sub.add_parser("estimate", help="corrected eigenproblem at a given dimension"))

    p = add_common(sub.add_parser("simulate-cv", help="simulate critical-value tables"))
    p.add_argument("--phi0-max", dest="phi0_max", type=int)
    p.add_argument("--allow-small", dest="allow_small", action="store_const", const=True)

    p = add_common(sub.add_parser("montecarlo", help="rejection-frequency experiments"))
    p.add_argument("--t", help="comma-separated sample sizes")
    p.add_argument("--phi0", help="comma-separated hypothesized dimensions")
    p.add_argument("--n-reps", dest="n_reps", type=int)
    p.add_argument("--grid-size", dest="grid_size", type=int)
    p.add_argument("--beta-min", dest="beta_min", type=float)
    p.add_argument("--beta-max", dest="beta_max", type=float)

    p = add_common(sub.add_parser("transform", help="logit / clr / inverse-clr"))
    p.add_argument("--kind", choices=["logit", "clr", "inverse-clr"])

    return parser


_DISPATCH = {
    "test-dim": cmd_test_dim,
    "estimate": cmd_estimate,
    "simulate-cv": cmd_simulate_cv,
    "montecarlo": cmd_montecarlo,
    "transform": cmd_transform,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge_config(args)
        cfg.command = args.command
        if args.command == "test-subspace-in":
            cmd_test_subspace(cfg, contains=False)
        elif args.command == "test-subspace-contains":
            cmd_test_subspace(cfg, contains=True)
        else:
            _DISPATCH[args.command](cfg)
        return 0
    except (FmfpcaError, ValueError, OSError) as exc:
        sys.stdout.write(
            json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}})
            + "\n"
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
