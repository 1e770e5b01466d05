"""Simulated null distributions of the dimension-test statistics.

Under the null the test statistic converges to the time integral of a
squared corrected Brownian functional: a dim_W-dimensional standard Brownian
motion, minus (when dim_B > 0) its projection on the running integral of an
independent dim_B-dimensional standard Brownian motion. Demeaning or
detrending the data changes both processes by the matching deterministic
adjustment. Quantiles of these limits are obtained by plain path simulation
and persisted as delimited tables keyed by full provenance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import GramSingular, MissingCriticalValues
from .fpca import DeterministicMode

__all__ = [
    "CriticalValueTable",
    "simulate_limit_draw",
    "critical_values",
]

_HEADER = ["mode", "dim_w", "dim_b", "level", "quantile", "reps", "ngrid", "seed"]

#: stable integers identifying each mode inside RNG substream keys
_MODE_CODE = {
    DeterministicMode.NONE: 0,
    DeterministicMode.CONSTANT: 1,
    DeterministicMode.LINEAR_TREND: 2,
}


@dataclass
class CriticalValueTable:
    """Simulated quantiles keyed by (mode, dim_w, dim_b, level).

    `level` is the quantile level (e.g. 0.95 for a 5%-size test). The
    provenance fields (reps, ngrid, seed) identify the simulation that
    produced every entry; tables missing provenance are refused on load.
    """

    entries: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def lookup(self, mode: DeterministicMode, dim_w: int, dim_b: int) -> dict:
        """All stored level -> quantile pairs for one test configuration."""
        mode = DeterministicMode.parse(mode)
        found = {
            key[3]: q
            for key, q in self.entries.items()
            if key[0] == mode and key[1] == dim_w and key[2] == dim_b
        }
        if not found:
            raise MissingCriticalValues(
                f"no critical values for mode={mode.value}, dim_w={dim_w}, "
                f"dim_b={dim_b}; run the critical-value simulation first"
            )
        return dict(sorted(found.items()))

    def merge(self, other: "CriticalValueTable") -> None:
        """Absorb another table produced with identical provenance."""
        if self.entries and self.provenance != other.provenance:
            raise ValueError("cannot merge tables with different provenance")
        if not self.entries:
            self.provenance = dict(other.provenance)
        self.entries.update(other.entries)

    def save(self, path) -> None:
        lines = [",".join(_HEADER)]
        for (mode, dim_w, dim_b, level), q in sorted(
            self.entries.items(), key=lambda kv: (kv[0][0].value, kv[0][1:])
        ):
            lines.append(
                f"{mode.value},{dim_w},{dim_b},{level:.17g},{q:.17g},"
                f"{self.provenance['reps']},{self.provenance['ngrid']},"
                f"{self.provenance['seed']}"
            )
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "CriticalValueTable":
        with open(path, "r", encoding="utf-8") as fh:
            rows = [line.strip() for line in fh if line.strip()]
        if not rows:
            raise MissingCriticalValues(f"critical-value table {path} is empty")
        header = rows[0].split(",")
        if header != _HEADER:
            raise MissingCriticalValues(
                f"critical-value table {path} lacks the required provenance "
                f"columns {_HEADER}"
            )
        table = cls()
        for row in rows[1:]:
            fields = row.split(",")
            if len(fields) != len(_HEADER):
                raise MissingCriticalValues(f"malformed table row: {row!r}")
            mode = DeterministicMode.parse(fields[0])
            key = (mode, int(fields[1]), int(fields[2]), float(fields[3]))
            table.entries[key] = float(fields[4])
            prov = {
                "reps": int(fields[5]),
                "ngrid": int(fields[6]),
                "seed": int(fields[7]),
            }
            if table.provenance and table.provenance != prov:
                raise MissingCriticalValues(
                    f"table {path} mixes rows with different provenance"
                )
            table.provenance = prov
        return table


def _transform_w(w: np.ndarray, s: np.ndarray, mode: DeterministicMode) -> np.ndarray:
    """Deterministic adjustment of the target Brownian motion, pointwise in s."""
    if mode is DeterministicMode.NONE:
        return w
    if mode is DeterministicMode.CONSTANT:
        return w - s[:, None] * w[-1]
    int_w = w[1:].mean(axis=0)
    r = s[:, None]
    return w + (2 * r - 3 * r**2) * w[-1] + (6 * r**2 - 6 * r) * int_w


def _transform_b(b: np.ndarray, s: np.ndarray, mode: DeterministicMode) -> np.ndarray:
    """Deterministic adjustment of the conditioning Brownian motion."""
    if mode is DeterministicMode.NONE:
        return b
    int_b = b[1:].mean(axis=0)
    if mode is DeterministicMode.CONSTANT:
        return b - int_b
    int_sb = (s[1:, None] * b[1:]).mean(axis=0)
    r = s[:, None]
    return b + (6 * r - 4) * int_b + (6 - 12 * r) * int_sb


def simulate_limit_draw(
    dim_w: int,
    dim_b: int,
    mode: DeterministicMode,
    ngrid: int,
    rng: np.random.Generator,
) -> float:
    """One draw of the limiting statistic on an ngrid-step path discretization.

    Brownian increments have variance 1/ngrid; the stochastic integral uses
    the left-point rule (its limit is the Ito integral), Lebesgue integrals
    use Riemann sums.
    """
    if dim_w < 1:
        raise ValueError("dim_w must be at least 1")
    if dim_b < 0:
        raise ValueError("dim_b must be nonnegative")
    if ngrid < 100:
        raise ValueError("ngrid must be at least 100")
    mode = DeterministicMode.parse(mode)
    n = ngrid
    s = np.arange(n + 1) / n
    dz = rng.standard_normal((n, dim_w + dim_b)) / math.sqrt(n)
    dw = dz[:, :dim_w]
    w = np.zeros((n + 1, dim_w))
    np.cumsum(dw, axis=0, out=w[1:])
    w_star = _transform_w(w, s, mode)
    if dim_b == 0:
        return float(np.mean(np.sum(w_star[1:] ** 2, axis=1)))

    b = np.zeros((n + 1, dim_b))
    np.cumsum(dz[:, dim_w:], axis=0, out=b[1:])
    b_star = _transform_b(b, s, mode)
    ito = dw.T @ b_star[:-1]
    gram = (b_star[1:].T @ b_star[1:]) / n
    eigvals = np.linalg.eigvalsh(gram)
    if eigvals[0] <= 1e-12 * max(eigvals[-1], 0.0):
        raise GramSingular("conditioning Gram matrix is numerically singular")
    ib = np.cumsum(b_star[:-1], axis=0) / n
    v = w_star[1:] - ib @ np.linalg.solve(gram, ito.T)
    return float(np.mean(np.sum(v**2, axis=1)))


def _draw_rng(seed: int, mode_code: int, dim_w: int, dim_b: int, index: int, retry: int):
    key = (mode_code, dim_w, dim_b, index, retry)
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def critical_values(
    dims: Sequence[tuple] | Iterable[tuple],
    mode: DeterministicMode,
    levels: Sequence[float],
    reps: int,
    ngrid: int,
    seed: int,
) -> CriticalValueTable:
    """Empirical quantiles of the limiting statistic for several dimensions.

    Each draw uses its own RNG substream derived from (seed, mode, dims,
    draw index), so results are bit-identical regardless of evaluation order
    or parallelism and independent across table cells. Draws with a singular
    conditioning Gram matrix are redrawn from a fresh substream; the retry
    count is recorded on the returned table as `gram_retries`.
    """
    if reps < 1:
        raise ValueError("reps must be positive")
    mode = DeterministicMode.parse(mode)
    code = _MODE_CODE[mode]
    levels = sorted(float(lv) for lv in levels)
    if any(not 0.0 < lv < 1.0 for lv in levels):
        raise ValueError("quantile levels must lie strictly inside (0, 1)")
    table = CriticalValueTable(
        provenance={"reps": int(reps), "ngrid": int(ngrid), "seed": int(seed)}
    )
    retries = 0
    for dim_w, dim_b in dims:
        draws = np.empty(reps)
        for i in range(reps):
            for retry in range(100):
                rng = _draw_rng(seed, code, dim_w, dim_b, i, retry)
                try:
                    draws[i] = simulate_limit_draw(dim_w, dim_b, mode, ngrid, rng)
                    break
                except GramSingular:
                    retries += 1
            else:
                raise GramSingular(
                    f"draw {i} for dims ({dim_w},{dim_b}) failed 100 retries"
                )
        qs = np.quantile(draws, levels)
        for lv, q in zip(levels, qs):
            table.entries[(mode, int(dim_w), int(dim_b), lv)] = float(q)
    table.gram_retries = retries
    return table
