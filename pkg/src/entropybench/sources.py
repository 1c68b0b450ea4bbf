"""Generators and transcript ingestion behind one source descriptor.

Kinds:
    os_entropy            operating-system entropy (urandom), rejection
                          sampled so every value in [0, max] is equally likely
    crypto_below          stdlib cryptographic below-bound draws (unbiased)
    seeded_deterministic  seeded PRNG, reproducible per seed
    biased                deliberately distorted negative-control profiles
    file_transcript       recorded values read from disk (never generates)
    llm_live              values obtained through the prompting harness
                          (never generates here)

Biased profiles are synthetic test fixtures; reports must carry the
``synthetic`` flag so they are never mistaken for real generator measurements.
"""

from __future__ import annotations

import os
import random
import re
import secrets
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .bitstream import IntegerSample

__all__ = [
    "SOURCE_KINDS",
    "UnsupportedSourceError",
    "SampleSource",
    "draw_integers",
    "ingest_transcript",
    "extract_integers",
    "write_integers",
]

SOURCE_KINDS = (
    "os_entropy",
    "crypto_below",
    "seeded_deterministic",
    "biased",
    "file_transcript",
    "llm_live",
)

_DIGIT_RUN = re.compile(r"\d+")


class UnsupportedSourceError(ValueError):
    """The requested operation is not available for this source kind."""


@dataclass(frozen=True)
class SampleSource:
    """Descriptor of where a sample came from, for provenance in reports."""

    kind: str
    label: str
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in SOURCE_KINDS:
            raise ValueError(f"unknown source kind {self.kind!r}")
        if not self.label:
            raise ValueError("source label must be nonempty")

    @property
    def synthetic(self) -> bool:
        return self.kind == "biased"


def _draw_os_entropy(count: int, upper: int) -> np.ndarray:
    # Rejection sampling on masked urandom bytes: unbiased for any bound.
    nbits = upper.bit_length()
    nbytes = (nbits + 7) // 8
    mask = (1 << nbits) - 1
    out = np.empty(count, dtype=np.int64)
    filled = 0
    while filled < count:
        want = count - filled
        batch = max(want + want // 2 + 16, 64)
        raw = np.frombuffer(os.urandom(batch * nbytes), dtype=np.uint8)
        values = np.zeros(batch, dtype=np.int64)
        for b in range(nbytes):
            values = (values << 8) | raw[b::nbytes].astype(np.int64)
        values &= mask
        accepted = values[values <= upper]
        take = min(want, accepted.size)
        out[filled : filled + take] = accepted[:take]
        filled += take
    return out


def _draw_biased(source: SampleSource, count: int, upper: int) -> np.ndarray:
    params = source.params
    profile = params.get("profile")
    rng = random.Random(params.get("seed", 0))
    if profile == "constant":
        value = int(params.get("value", 0))
        if not 0 <= value <= upper:
            raise ValueError(f"constant value {value} outside [0, {upper}]")
        return np.full(count, value, dtype=np.int64)
    if profile == "top_heavy":
        # A dominant favorite value with the leftover mass spread uniformly:
        # mimics generators that cluster on preferred numbers.
        value = int(params.get("value", upper // 2))
        mass = float(params.get("mass", 0.8))
        if not 0 <= value <= upper:
            raise ValueError(f"favorite value {value} outside [0, {upper}]")
        if not 0.0 < mass <= 1.0:
            raise ValueError("mass must be in (0, 1]")
        out = np.empty(count, dtype=np.int64)
        for i in range(count):
            out[i] = value if rng.random() < mass else rng.randint(0, upper)
        return out
    if profile == "truncated":
        low = int(params.get("low", 0))
        high = int(params.get("high", upper // 2))
        if not 0 <= low <= high <= upper:
            raise ValueError(f"truncated range [{low}, {high}] invalid for max {upper}")
        return np.array([rng.randint(low, high) for _ in range(count)], dtype=np.int64)
    raise ValueError(f"unknown bias profile {profile!r}")


def draw_integers(source: SampleSource, count: int, upper: int) -> IntegerSample:
    """Draw ``count`` integers in [0, upper] from a generating source.

    Raises:
        UnsupportedSourceError: for file_transcript and llm_live kinds,
            which carry recorded values rather than generating new ones.
        ValueError: for invalid count/upper or bias parameters.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if upper < 1:
        raise ValueError(f"upper bound must be >= 1, got {upper}")
    if source.kind == "os_entropy":
        values = _draw_os_entropy(count, upper)
    elif source.kind == "crypto_below":
        values = np.array(
            [secrets.randbelow(upper + 1) for _ in range(count)], dtype=np.int64
        )
    elif source.kind == "seeded_deterministic":
        rng = random.Random(source.params.get("seed", 0))
        values = np.array([rng.randint(0, upper) for _ in range(count)], dtype=np.int64)
    elif source.kind == "biased":
        values = _draw_biased(source, count, upper)
    else:
        raise UnsupportedSourceError(
            f"source kind {source.kind!r} does not generate values"
        )
    return IntegerSample(values, declared_max=upper, source=source)


def extract_integers(
    text: str, declared_max: int, strict: bool = False
) -> tuple[list[int], int]:
    """Pull integer values out of free-form generator output.

    Lenient mode treats every maximal decimal-digit run as a candidate value
    and ignores surrounding prose, code fences, and list markers; values
    above ``declared_max`` are dropped.  Strict mode requires the text to be
    a JSON array of integers.

    Returns:
        (values, dropped) where dropped counts out-of-range candidates.
    """
    if strict:
        import json

        data = json.loads(text)
        if not isinstance(data, list) or not all(
            isinstance(v, int) and not isinstance(v, bool) for v in data
        ):
            raise ValueError("strict mode requires a JSON array of integers")
        candidates = data
    else:
        candidates = [int(tok) for tok in _DIGIT_RUN.findall(text)]
    values = [v for v in candidates if 0 <= v <= declared_max]
    return values, len(candidates) - len(values)


def ingest_transcript(
    path: str | Path,
    declared_max: int,
    strict: bool = False,
    source: Optional[SampleSource] = None,
) -> tuple[IntegerSample, dict]:
    """Read a recorded transcript into a sample, leniently by default.

    Returns the sample plus a diagnostics dict {extracted, dropped, kept}.

    Raises:
        ValueError: if no values can be extracted.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    values, dropped = extract_integers(text, declared_max, strict=strict)
    if not values:
        raise ValueError(f"{path}: no usable integer values found")
    if source is None:
        source = SampleSource(kind="file_transcript", label=path.name, params={"path": str(path)})
    sample = IntegerSample(np.array(values, dtype=np.int64), declared_max, source=source)
    diagnostics = {
        "extracted": len(values) + dropped,
        "dropped": dropped,
        "kept": len(values),
    }
    return sample, diagnostics


def write_integers(path: str | Path, sample: IntegerSample) -> None:
    """Serialize a sample as newline-delimited decimals (re-ingestable)."""
    Path(path).write_text(
        "\n".join(str(v) for v in sample.values.tolist()) + "\n", encoding="utf-8"
    )
