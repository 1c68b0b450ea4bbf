"""Canonical bit-level representation of samples and file ingestion.

Bit order is fixed once for the whole toolkit: each value (integer or
character code point) expands to its fixed-width binary form most
significant bit first, values concatenated in input order with no
separators.  Every p-value downstream depends on this choice, so it is not
configurable.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "BitSequence",
    "IntegerSample",
    "from_integers",
    "from_text",
    "read_integers_file",
    "read_passwords_file",
]


class BitSequence:
    """Immutable finite sequence of bits.

    Construct from a "0101" string, an iterable of 0/1 ints, or a numpy
    array.  The backing array is locked read-only after construction.
    """

    __slots__ = ("_bits",)

    def __init__(self, bits) -> None:
        if isinstance(bits, BitSequence):
            arr = bits._bits
        elif isinstance(bits, str):
            if bits and set(bits) - {"0", "1"}:
                raise ValueError("bit string may contain only '0' and '1'")
            arr = np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")
        else:
            arr = np.asarray(bits, dtype=np.uint8)
            if arr.ndim != 1:
                raise ValueError("bits must be one-dimensional")
            if arr.size and int(arr.max(initial=0)) > 1:
                raise ValueError("bits must be 0 or 1")
        # always copy so locking the buffer never touches a caller's array
        arr = np.array(arr, dtype=np.uint8, order="C")
        arr.setflags(write=False)
        self._bits = arr

    @property
    def bits(self) -> np.ndarray:
        """Read-only uint8 array of 0/1 values."""
        return self._bits

    def __len__(self) -> int:
        return int(self._bits.size)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return BitSequence(self._bits[idx])
        return int(self._bits[idx])

    def __iter__(self):
        return iter(self._bits.tolist())

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitSequence):
            return NotImplemented
        return np.array_equal(self._bits, other._bits)

    def __hash__(self) -> int:
        return hash(self._bits.tobytes())

    def __repr__(self) -> str:
        head = "".join(str(b) for b in self._bits[:32].tolist())
        tail = "..." if len(self) > 32 else ""
        return f"BitSequence({head}{tail}, n={len(self)})"

    def to01(self) -> str:
        return "".join("01"[b] for b in self._bits.tolist())

    def count_ones(self) -> int:
        return int(self._bits.sum())


@dataclass(frozen=True)
class IntegerSample:
    """An ordered transcript of nonnegative integers with a declared range.

    ``declared_max`` is the inclusive upper bound the values were requested
    under (255 for 8-bit samples); it drives both the bit expansion width
    checks and the sign test's reference median.
    """

    values: np.ndarray
    declared_max: int
    source: Optional[object] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=np.int64)
        if arr.ndim != 1:
            raise ValueError("values must be one-dimensional")
        if self.declared_max < 1:
            raise ValueError("declared_max must be >= 1")
        if arr.size:
            lo, hi = int(arr.min()), int(arr.max())
            if lo < 0:
                raise ValueError(f"negative value {lo} in sample")
            if hi > self.declared_max:
                raise ValueError(
                    f"value {hi} exceeds declared_max {self.declared_max}"
                )
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return int(self.values.size)


def from_integers(sample: IntegerSample, bit_width: int) -> BitSequence:
    """Expand each value to ``bit_width`` bits, MSB first, and concatenate.

    Raises:
        ValueError: if bit_width < 1 or any value needs more bits.
    """
    if bit_width < 1:
        raise ValueError("bit_width must be >= 1")
    if bit_width > 62:
        raise ValueError("bit_width above 62 is not supported")
    values = sample.values
    if values.size and int(values.max()) >= (1 << bit_width):
        bad = int(values.max())
        raise ValueError(f"value {bad} does not fit in {bit_width} bits")
    shifts = np.arange(bit_width - 1, -1, -1, dtype=np.int64)
    bits = (values[:, None] >> shifts[None, :]) & 1
    return BitSequence(bits.reshape(-1).astype(np.uint8))


def from_text(passwords: Sequence[str], encoding_width: int = 8) -> BitSequence:
    """Encode character strings as concatenated fixed-width code points.

    Characters are taken as raw single-byte code points (no alphabet
    re-indexing), ``encoding_width`` bits each, MSB first; strings are
    concatenated in input order with no separators.

    Raises:
        ValueError: if encoding_width is not 7 or 8, or a character's code
            point does not fit.
    """
    if encoding_width not in (7, 8):
        raise ValueError("encoding_width must be 7 or 8")
    text = "".join(passwords)
    if not text:
        return BitSequence(np.empty(0, dtype=np.uint8))
    codes = np.array([ord(c) for c in text], dtype=np.int64)
    limit = 1 << encoding_width
    if int(codes.max()) >= limit:
        bad = chr(int(codes[codes >= limit][0]))
        raise ValueError(
            f"character {bad!r} is not representable in {encoding_width} bits"
        )
    sample = IntegerSample(codes, declared_max=limit - 1)
    return from_integers(sample, encoding_width)


# ---------------------------------------------------------------------------
# File ingestion.  Formats are bit-exact by construction: the loaders produce
# integer lists, and the single from_integers path above fixes the bit order.
# ---------------------------------------------------------------------------

_FORMATS = ("lines", "json", "csv")


def _sniff_format(path: Path) -> str:
    suffix = path.suffix.lower()
    if suffix == ".json":
        return "json"
    if suffix == ".csv":
        return "csv"
    return "lines"


def _parse_int(token: str, where: str) -> int:
    try:
        return int(token, 10)
    except ValueError:
        raise ValueError(f"{where}: not a decimal integer: {token!r}") from None


def read_integers_file(
    path: str | Path,
    declared_max: int,
    fmt: Optional[str] = None,
    source: Optional[object] = None,
) -> IntegerSample:
    """Load an integer transcript from disk.

    Formats: newline-delimited decimals (``lines``), a JSON array
    (``json``), or a single-column CSV (``csv``).  The format is sniffed
    from the extension unless ``fmt`` is given explicitly.
    """
    path = Path(path)
    fmt = fmt or _sniff_format(path)
    if fmt not in _FORMATS:
        raise ValueError(f"unknown format {fmt!r}, expected one of {_FORMATS}")
    text = path.read_text(encoding="utf-8")
    if fmt == "json":
        data = json.loads(text)
        if not isinstance(data, list) or not all(isinstance(v, int) for v in data):
            raise ValueError(f"{path}: JSON transcript must be an array of integers")
        values = data
    elif fmt == "csv":
        values = []
        for i, row in enumerate(csv.reader(io.StringIO(text))):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 1:
                raise ValueError(f"{path}: CSV row {i + 1} has {len(row)} columns, expected 1")
            values.append(_parse_int(row[0].strip(), f"{path}: row {i + 1}"))
    else:
        values = [
            _parse_int(line.strip(), f"{path}: line {i + 1}")
            for i, line in enumerate(text.splitlines())
            if line.strip()
        ]
    return IntegerSample(np.array(values, dtype=np.int64), declared_max, source=source)


def read_passwords_file(path: str | Path) -> list[str]:
    """Load a newline-delimited password corpus; blank lines are skipped."""
    text = Path(path).read_text(encoding="utf-8")
    return [line for line in text.splitlines() if line]
