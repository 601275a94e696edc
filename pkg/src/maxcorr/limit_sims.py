"""Monte Carlo experiments tracking W_n and T_n under growing n.

Each (n, rep) cell draws a fresh n x p_n array (two for T_n) from its own
stream, so the experiment checks distribution-level trends of the
normalized ratios rather than single sample paths.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import rng as rngmod
from .distributions import DistributionSpec, parse_distribution, sample
from .stats_core import t_statistic, w_statistic

NORMALIZATIONS = ("power", "sqrt-nlogn")
EXPECTATIONS = ("to_zero", "to_two", "bounded_by_two", "diverges")
DEFAULT_MAX_BYTES = 4 * 2**30


class InfeasibleConfig(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    dist_u: DistributionSpec
    n_grid: tuple[int, ...]
    reps: int
    master_seed: int
    normalization: str = "sqrt-nlogn"
    alpha: float | None = None
    dist_v: DistributionSpec | None = None
    c: float = 1.0

    def __post_init__(self):
        grid = tuple(int(n) for n in self.n_grid)
        object.__setattr__(self, "n_grid", grid)
        if not grid:
            raise ValueError("n_grid is empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("n_grid must be strictly increasing")
        if grid[0] < 1:
            raise ValueError("grid sizes must be >= 1")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if not self.c > 0:
            raise ValueError("p_n rule needs c > 0")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
        if self.normalization == "power":
            if self.alpha is None or not 0.5 < self.alpha <= 1:
                raise ValueError("power normalization needs 1/2 < alpha <= 1")
        elif grid[0] < 3:
            raise ValueError("sqrt-nlogn normalization needs n >= 3")
        if min(self.p(n) for n in grid) < 2:
            raise ValueError("p_n must be at least 2 on the whole grid")

    @property
    def mode(self) -> str:
        return "W" if self.dist_v is None else "T"

    def p(self, n: int) -> int:
        """p_n = round(c n), halves rounded up."""
        return int(math.floor(self.c * n + 0.5))

    def normalizer(self, n: int) -> float:
        if self.normalization == "power":
            return float(n) ** self.alpha
        return math.sqrt(n * math.log(n))

    def to_dict(self) -> dict:
        return {
            "dist_u": self.dist_u.to_text(),
            "dist_v": self.dist_v.to_text() if self.dist_v is not None else None,
            "mode": self.mode,
            "c": self.c,
            "n_grid": list(self.n_grid),
            "reps": self.reps,
            "alpha": self.alpha,
            "normalization": self.normalization,
            "master_seed": self.master_seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        known = {"dist_u", "dist_v", "mode", "c", "n_grid", "reps", "alpha",
                 "normalization", "master_seed"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        dist_v = d.get("dist_v")
        if d.get("mode") == "T" and dist_v is None:
            raise ValueError("T mode needs dist_v")
        if d.get("mode") == "W" and dist_v is not None:
            raise ValueError("W mode takes no dist_v")
        return cls(
            dist_u=parse_distribution(d["dist_u"]),
            dist_v=parse_distribution(dist_v) if dist_v is not None else None,
            c=float(d.get("c", 1.0)),
            n_grid=tuple(d["n_grid"]),
            reps=int(d["reps"]),
            alpha=None if d.get("alpha") is None else float(d["alpha"]),
            normalization=d.get("normalization", "sqrt-nlogn"),
            master_seed=int(d["master_seed"]),
        )


class Record(NamedTuple):
    n: int
    rep: int
    statistic: float
    ratio: float


class SummaryRow(NamedTuple):
    n: int
    median: float
    q05: float
    q95: float


@dataclass
class SimResult:
    config: SimConfig
    records: list[Record] = field(default_factory=list)

    def ratios(self, n: int) -> np.ndarray:
        return np.array([r.ratio for r in self.records if r.n == n])

    @property
    def summary(self) -> list[SummaryRow]:
        return summarize(self)


def estimate_bytes(cfg: SimConfig, workers: int = 1) -> int:
    n = cfg.n_grid[-1]
    p = cfg.p(n)
    arrays = 2 if cfg.mode == "T" else 1
    # data plus a few panel-strip buffers per concurrent task
    per_task = 8 * (arrays * n * p + 4 * 128 * p)
    return per_task * max(1, workers)


def simulate_cell(cfg: SimConfig, n: int, rep: int) -> Record:
    """One replication at sample size n, drawn from stream (seed, n, rep)."""
    gen = rngmod.stream(cfg.master_seed, n, rep)
    p = cfg.p(n)
    # draw p x n and transpose: each column of the n x p view is contiguous
    u = sample(cfg.dist_u, (p, n), gen).T
    if cfg.dist_v is None:
        stat = w_statistic(u).value
    else:
        v = sample(cfg.dist_v, (p, n), gen).T
        stat = t_statistic(u, v).value
    return Record(n, rep, stat, stat / cfg.normalizer(n))


def run_experiment(cfg: SimConfig, workers: int = 1,
                   max_bytes: int = DEFAULT_MAX_BYTES) -> SimResult:
    need = estimate_bytes(cfg, workers)
    if need > max_bytes:
        raise InfeasibleConfig(
            f"experiment needs about {need / 2**20:.0f} MiB, limit is {max_bytes / 2**20:.0f} MiB"
        )
    cells = [(n, rep) for n in cfg.n_grid for rep in range(cfg.reps)]
    if workers <= 1:
        records = [simulate_cell(cfg, n, rep) for n, rep in cells]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda c: simulate_cell(cfg, *c), cells))
    return SimResult(cfg, records)


def summarize(result: SimResult) -> list[SummaryRow]:
    """Median and 5%/95% quantiles of the ratio per n (linear interpolation)."""
    if not result.records:
        raise ValueError("empty result")
    rows = []
    for n in sorted({r.n for r in result.records}):
        vals = result.ratios(n)
        q05, med, q95 = np.quantile(vals, [0.05, 0.5, 0.95], method="linear")
        rows.append(SummaryRow(n, float(med), float(q05), float(q95)))
    return rows


@dataclass
class TrendCheck:
    expectation: str
    passed: bool
    medians: list[float]
    detail: str

    def to_dict(self) -> dict:
        return {"expectation": self.expectation, "passed": self.passed,
                "medians": self.medians, "detail": self.detail}


def trend_assert(result: SimResult, expectation: str, band: tuple[float, float] = (1.75, 2.25),
                 slack: float = 0.25) -> TrendCheck:
    """Check the median-ratio trend across the grid.

    to_zero         medians strictly decrease and last < 0.5 * first
    to_two          last median inside ``band`` and |median - 2| does not grow
                    over the last two grid points
    bounded_by_two  95% quantile at the last n <= 2 + slack
    diverges        last median > 2 * first
    """
    if expectation not in EXPECTATIONS:
        raise ValueError(f"expectation must be one of {EXPECTATIONS}")
    rows = summarize(result)
    if len(rows) < 3:
        raise ValueError(f"trend checks need at least 3 grid points, got {len(rows)}")
    med = [r.median for r in rows]
    first, last = med[0], med[-1]
    if expectation == "to_zero":
        decreasing = all(b < a for a, b in zip(med, med[1:]))
        passed = decreasing and last < 0.5 * first
        detail = f"strictly decreasing={decreasing}, last/first={last / first:.4g} (need < 0.5)"
    elif expectation == "to_two":
        lo, hi = band
        inside = lo <= last <= hi
        closing = abs(last - 2) <= abs(med[-2] - 2)
        passed = inside and closing
        detail = (f"last median {last:.4g} in [{lo}, {hi}]: {inside}; "
                  f"|m-2| {abs(med[-2] - 2):.4g} -> {abs(last - 2):.4g} nonincreasing: {closing}")
    elif expectation == "bounded_by_two":
        q95 = rows[-1].q95
        passed = q95 <= 2 + slack
        detail = f"q95 at n={rows[-1].n} is {q95:.4g} (limit {2 + slack:.4g})"
    else:
        passed = last > 2 * first
        detail = f"last/first={last / first:.4g} (need > 2)"
    return TrendCheck(expectation, passed, med, detail)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_records_csv(result: SimResult, path) -> None:
    lines = ["n,rep,statistic,ratio"]
    lines += [f"{r.n},{r.rep},{_fmt(r.statistic)},{_fmt(r.ratio)}" for r in result.records]
    Path(path).write_text("\n".join(lines) + "\n")


def write_summary_csv(result: SimResult, path) -> None:
    lines = ["n,median,q05,q95"]
    lines += [f"{r.n},{_fmt(r.median)},{_fmt(r.q05)},{_fmt(r.q95)}" for r in summarize(result)]
    Path(path).write_text("\n".join(lines) + "\n")


def write_plot_data(result: SimResult, path) -> None:
    """Whitespace-separated ``n median_ratio`` columns for gnuplot and friends."""
    cfg = result.config
    label = "W_n" if cfg.mode == "W" else "T_n"
    norm = f"n^{cfg.alpha}" if cfg.normalization == "power" else "sqrt(n ln n)"
    lines = [f"# {label} / {norm}: x = n, y = median ratio"]
    lines += [f"{r.n} {_fmt(r.median)}" for r in summarize(result)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_records_csv(path) -> list[Record]:
    rows = Path(path).read_text().splitlines()
    if rows[0] != "n,rep,statistic,ratio":
        raise ValueError(f"unexpected header {rows[0]!r}")
    out = []
    for line in rows[1:]:
        n, rep, stat, ratio = line.split(",")
        out.append(Record(int(n), int(rep), float(stat), float(ratio)))
    return out
