"""Cache-blocked cross-product kernels.

Columns are processed in panels of ``panel`` columns. For each panel the
products against all later (or all) columns are formed one row block at a
time with BLAS, and the row-block partial results are folded together with
compensated (TwoSum) accumulation, so the rounding error grows with the row
block length instead of with n.

Panels are independent tasks; results are reduced in panel order, so the
output does not depend on the number of workers.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, NamedTuple

import numpy as np

DEFAULT_PANEL = 128
DEFAULT_ROW_BLOCK = 2048


class MaxEntry(NamedTuple):
    value: float
    i: int
    j: int


class CompensatedSum:
    """Elementwise running sum with a TwoSum error term (Neumaier/Kahan-Babuska)."""

    def __init__(self, first: np.ndarray):
        self.total = first
        self.comp = np.zeros_like(first)

    def add(self, x: np.ndarray) -> None:
        s = self.total
        t = s + x
        bp = t - s
        self.comp += (s - (t - bp)) + (x - bp)
        self.total = t

    def result(self) -> np.ndarray:
        return self.total + self.comp


def panel_products(a: np.ndarray, b: np.ndarray, cols: slice, start: int,
                   row_block: int = DEFAULT_ROW_BLOCK) -> np.ndarray:
    """a[:, cols].T @ b[:, start:], accumulated over row blocks with compensation."""
    n = a.shape[0]
    acc = None
    for r0 in range(0, n, row_block):
        r1 = min(n, r0 + row_block)
        part = a[r0:r1, cols].T @ b[r0:r1, start:]
        if acc is None:
            acc = CompensatedSum(part)
        else:
            acc.add(part)
    return acc.result()


def _panels(p: int, panel: int):
    return [slice(i0, min(p, i0 + panel)) for i0 in range(0, p, panel)]


def _run(tasks: list, fn: Callable, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def gram_upper(a: np.ndarray, panel: int = DEFAULT_PANEL, row_block: int = DEFAULT_ROW_BLOCK,
               workers: int = 1) -> np.ndarray:
    """Dense p x p matrix whose strict upper triangle holds a[:, i] . a[:, j].

    Entries on and below the diagonal are zero.
    """
    p = a.shape[1]
    out = np.zeros((p, p))

    def strip(cols):
        return panel_products(a, a, cols, cols.start, row_block)

    for cols, block in zip(_panels(p, panel), _run(_panels(p, panel), strip, workers)):
        out[cols, cols.start:] = np.triu(block, k=1)
    return out


def max_abs_upper(a: np.ndarray, panel: int = DEFAULT_PANEL, row_block: int = DEFAULT_ROW_BLOCK,
                  workers: int = 1) -> MaxEntry:
    """max over i < j of |a[:, i] . a[:, j]|; ties go to the smallest (i, j)."""
    p = a.shape[1]
    if p < 2:
        raise ValueError("need at least two columns")

    def strip(cols):
        block = np.abs(panel_products(a, a, cols, cols.start, row_block))
        block[np.tril_indices(block.shape[0], m=block.shape[1])] = -1.0
        return _block_argmax(block, cols.start, cols.start)

    return _reduce(_run(_panels(p, panel), strip, workers))


def max_abs_cross_offdiag(u: np.ndarray, v: np.ndarray, panel: int = DEFAULT_PANEL,
                          row_block: int = DEFAULT_ROW_BLOCK, workers: int = 1) -> MaxEntry:
    """max over ordered pairs i != j of |u[:, i] . v[:, j]|; ties to smallest (i, j)."""
    p = u.shape[1]
    if p < 2:
        raise ValueError("need at least two columns")

    def strip(cols):
        block = np.abs(panel_products(u, v, cols, 0, row_block))
        rows = np.arange(block.shape[0])
        block[rows, cols.start + rows] = -1.0
        return _block_argmax(block, cols.start, 0)

    return _reduce(_run(_panels(p, panel), strip, workers))


def _block_argmax(block: np.ndarray, i0: int, j0: int) -> MaxEntry:
    # row-major argmax returns the first maximum, i.e. the smallest (i, j)
    flat = int(np.argmax(block))
    r, c = divmod(flat, block.shape[1])
    return MaxEntry(float(block[r, c]), i0 + r, j0 + c)


def _reduce(results: list[MaxEntry]) -> MaxEntry:
    best = None
    for entry in results:
        # strips arrive in increasing i, so '>' keeps the earliest tie
        if entry.value < 0:
            continue
        if best is None or entry.value > best.value:
            best = entry
    return best
