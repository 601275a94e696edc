"""Sample correlation matrix and the max-entry statistics L_n, W_n, T_n.

Data matrices are n x p float64 arrays (rows are samples, columns are
variables), held in column-major order so each column is contiguous.
Column indices in every result are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .kernels import MaxEntry


class ZeroVarianceError(ValueError):
    """A column has all values equal, so its correlations are undefined."""

    def __init__(self, columns):
        self.columns = list(columns)
        super().__init__(f"zero-variance column(s): {self.columns}")


def as_data_matrix(x, min_rows: int = 1, min_cols: int = 1) -> np.ndarray:
    """Validate and convert to a column-major float64 n x p array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"data matrix must be 2-d, got shape {arr.shape}")
    n, p = arr.shape
    if n < min_rows or p < min_cols:
        raise ValueError(f"need at least {min_rows} rows and {min_cols} columns, got {n}x{p}")
    bad = ~np.isfinite(arr)
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise ValueError(f"non-finite value {arr[r, c]} at row {r}, column {c} (0-based)")
    return np.asfortranarray(arr)


@dataclass
class StandardizeReport:
    kept: list[int]
    dropped: list[int] = field(default_factory=list)


def standardize_columns(x, zero_variance: str = "error") -> tuple[np.ndarray, StandardizeReport]:
    """Center each column and scale it to unit sum of squares.

    ``zero_variance`` is ``"error"`` (raise :class:`ZeroVarianceError`) or
    ``"drop"`` (remove the offending columns and list them in the report).
    """
    if zero_variance not in ("error", "drop"):
        raise ValueError(f"unknown zero-variance policy {zero_variance!r}")
    a = as_data_matrix(x, min_rows=2)
    n = a.shape[0]
    mean = a.sum(axis=0) / n
    centered = a - mean
    # second pass removes the rounding left in the first mean
    centered -= centered.sum(axis=0) / n
    ss = np.einsum("ij,ij->j", centered, centered)
    scale = np.abs(a).max(axis=0)
    degenerate = np.flatnonzero(np.all(a == a[0], axis=0) | (ss <= (n * 1e-15 * scale) ** 2))
    if degenerate.size and zero_variance == "error":
        raise ZeroVarianceError(degenerate.tolist())
    keep = np.setdiff1d(np.arange(a.shape[1]), degenerate)
    z = centered[:, keep] / np.sqrt(ss[keep])
    return np.asfortranarray(z), StandardizeReport(keep.tolist(), degenerate.tolist())


@dataclass
class CorrMatrix:
    """Upper triangle of a correlation matrix, stored row by row (i < j)."""

    p: int
    values: np.ndarray

    def __getitem__(self, ij):
        i, j = ij
        if i == j:
            return 1.0
        if i > j:
            i, j = j, i
        # offset of row i in the packed strict upper triangle
        k = i * self.p - i * (i + 1) // 2 + (j - i - 1)
        return float(self.values[k])

    def to_dense(self) -> np.ndarray:
        out = np.eye(self.p)
        iu = np.triu_indices(self.p, k=1)
        out[iu] = self.values
        out[iu[1], iu[0]] = self.values
        return out

    def pairs(self):
        iu = np.triu_indices(self.p, k=1)
        return zip(iu[0].tolist(), iu[1].tolist(), self.values.tolist())


def correlation_matrix(x, workers: int = 1, panel: int = kernels.DEFAULT_PANEL,
                       row_block: int = kernels.DEFAULT_ROW_BLOCK) -> CorrMatrix:
    z, _ = standardize_columns(x, "error")
    g = kernels.gram_upper(z, panel=panel, row_block=row_block, workers=workers)
    # |rho| <= 1 exactly; rounding can push a duplicated column one ulp past it
    return CorrMatrix(z.shape[1], np.clip(g[np.triu_indices(z.shape[1], k=1)], -1.0, 1.0))


def l_statistic(x, workers: int = 1, panel: int = kernels.DEFAULT_PANEL,
                row_block: int = kernels.DEFAULT_ROW_BLOCK) -> MaxEntry:
    """L_n = max_{i<j} |rho_ij| with its argmax pair."""
    a = as_data_matrix(x, min_rows=2, min_cols=2)
    z, _ = standardize_columns(a, "error")
    best = kernels.max_abs_upper(z, panel=panel, row_block=row_block, workers=workers)
    return best._replace(value=min(best.value, 1.0))


def w_statistic(x, workers: int = 1, panel: int = kernels.DEFAULT_PANEL,
                row_block: int = kernels.DEFAULT_ROW_BLOCK) -> MaxEntry:
    """W_n = max_{i<j} |sum_k x_ki x_kj| (uncentered cross products)."""
    a = as_data_matrix(x, min_cols=2)
    return kernels.max_abs_upper(a, panel=panel, row_block=row_block, workers=workers)


def t_statistic(u, v, workers: int = 1, panel: int = kernels.DEFAULT_PANEL,
                row_block: int = kernels.DEFAULT_ROW_BLOCK) -> MaxEntry:
    """T_n = max over ordered pairs i != j of |sum_k u_ki v_kj|."""
    a = as_data_matrix(u, min_cols=2)
    b = as_data_matrix(v, min_cols=2)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return kernels.max_abs_cross_offdiag(a, b, panel=panel, row_block=row_block, workers=workers)


def max_product_statistic(x, m: int) -> float:
    """max over m-subsets of prod |x_i|: the product of the m largest magnitudes."""
    a = np.abs(np.asarray(x, dtype=float).ravel())
    if m < 1:
        raise ValueError("m must be >= 1")
    if m > a.size:
        raise ValueError(f"m={m} exceeds the number of values {a.size}")
    top = np.partition(a, a.size - m)[a.size - m:]
    return float(np.prod(np.sort(top)))


def max_product_rows(x: np.ndarray, m: int) -> np.ndarray:
    """Row-wise :func:`max_product_statistic` for a 2-d array."""
    a = np.abs(np.asarray(x, dtype=float))
    k = a.shape[1]
    if m > k:
        raise ValueError(f"m={m} exceeds the row length {k}")
    top = np.partition(a, k - m, axis=1)[:, k - m:]
    return np.sort(top, axis=1).prod(axis=1)
