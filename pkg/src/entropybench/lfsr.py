"""Berlekamp-Massey minimal LFSR length.

The connection polynomial and the seen-so-far window are kept in Python
integers, so each step is a handful of word-wide operations instead of a
coefficient loop.  Bit i of the window holds the sequence value i steps
back, which makes the discrepancy a single AND + parity.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

__all__ = ["berlekamp_massey", "linear_complexities"]


def berlekamp_massey(seq: Iterable[int]) -> int:
    """Length of the shortest LFSR generating ``seq``.

    Returns 0 for the all-zero sequence; a sequence of n bits never needs
    more than n stages.
    """
    conn = 1          # connection polynomial, bit i = coefficient c_i (c_0 = 1)
    prev = 1          # polynomial before the last length change
    length = 0
    last_change = -1
    window = 0
    for n, bit in enumerate(seq):
        if bit not in (0, 1):
            raise ValueError(f"sequence items must be bits, got {bit!r}")
        window = (window << 1) | bit
        # discrepancy: parity of sum(c_i * s_{n-i})
        if (conn & window).bit_count() & 1:
            snapshot = conn
            conn ^= prev << (n - last_change)
            if 2 * length <= n:
                length = n + 1 - length
                prev = snapshot
                last_change = n
    return length


def linear_complexities(blocks: np.ndarray) -> list[int]:
    """Berlekamp-Massey length of every row of a (num_blocks, M) bit array."""
    blocks = np.asarray(blocks, dtype=np.uint8)
    if blocks.ndim != 2:
        raise ValueError("expected a (num_blocks, M) bit array")
    return [berlekamp_massey(row) for row in blocks.tolist()]
