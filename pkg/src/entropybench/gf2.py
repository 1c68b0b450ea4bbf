"""Dense GF(2) rank computation for the binary-rank test.

Matrices are stored one row per machine word: bit j of ``rows[r]`` is the
entry in row r, column j.  The batch variant eliminates one column at a time
across all matrices in lockstep, which keeps the inner loops in numpy.
"""

from __future__ import annotations

import numpy as np

__all__ = ["gf2_rank", "gf2_rank_batch", "pack_rows", "transpose_rows"]


def pack_rows(matrix) -> np.ndarray:
    """Pack a (rows, cols) 0/1 matrix into one uint64 bitmask per row."""
    m = np.asarray(matrix, dtype=np.uint64)
    if m.ndim != 2 or m.shape[1] > 64:
        raise ValueError("expected a 2-D matrix with at most 64 columns")
    shifts = np.arange(m.shape[1], dtype=np.uint64)
    return (m << shifts[None, :]).sum(axis=1, dtype=np.uint64)


def transpose_rows(rows: np.ndarray, ncols: int) -> np.ndarray:
    """Transpose a row-bitmask matrix (bit j of row r -> bit r of row j)."""
    rows = np.asarray(rows, dtype=np.uint64)
    out = np.zeros(ncols, dtype=np.uint64)
    for r, word in enumerate(rows.tolist()):
        for j in range(ncols):
            if (word >> j) & 1:
                out[j] |= np.uint64(1 << r)
    return out


def gf2_rank(rows, ncols: int = 32) -> int:
    """GF(2) rank of a single matrix given as an iterable of row bitmasks."""
    work = [int(r) for r in rows]
    rank = 0
    for col in range(ncols):
        pivot = None
        for r in range(rank, len(work)):
            if (work[r] >> col) & 1:
                pivot = r
                break
        if pivot is None:
            continue
        work[rank], work[pivot] = work[pivot], work[rank]
        for r in range(rank + 1, len(work)):
            if (work[r] >> col) & 1:
                work[r] ^= work[rank]
        rank += 1
    return rank


def gf2_rank_batch(mats: np.ndarray, ncols: int = 32) -> np.ndarray:
    """GF(2) ranks of a batch of matrices.

    Args:
        mats: (num_matrices, num_rows) uint64 array of row bitmasks.
        ncols: number of significant columns per row.

    Returns:
        (num_matrices,) int64 array of ranks.
    """
    rows = np.asarray(mats, dtype=np.uint64).copy()
    if rows.ndim != 2:
        raise ValueError("expected a (num_matrices, num_rows) array")
    num, nrows = rows.shape
    rank = np.zeros(num, dtype=np.int64)
    row_idx = np.arange(nrows)[None, :]
    one = np.uint64(1)
    for col in range(ncols):
        shift = np.uint64(col)
        bit = (rows >> shift) & one
        candidates = (bit == 1) & (row_idx >= rank[:, None])
        has_pivot = candidates.any(axis=1)
        mi = np.nonzero(has_pivot)[0]
        if mi.size == 0:
            continue
        pivot = np.argmax(candidates[mi], axis=1)
        dest = rank[mi]
        # Swap the pivot row up to the working position.
        tmp = rows[mi, pivot].copy()
        rows[mi, pivot] = rows[mi, dest]
        rows[mi, dest] = tmp
        # Clear this column below the working position.
        below = (((rows >> shift) & one) == 1) & (row_idx >= rank[:, None])
        below[mi, dest] = False
        pivot_rows = np.zeros(num, dtype=np.uint64)
        pivot_rows[mi] = rows[mi, dest]
        rows ^= np.where(below, pivot_rows[:, None], np.uint64(0))
        rank[mi] += 1
    return rank
