"""Shuffle-quality scoring from pairwise positional distances.

For N labeled cards, each recorded trial is a full deck ordering.  Distance
between two cards in a trial is the absolute difference of their positions
(1..N-1, not circular).  Across trials this gives every unordered pair an
empirical distance distribution; the score is the worst pair's entropy in
base N-1, so 1.0 means every pair's distances look maximally spread and 0
means some pair is frozen in place.
"""

from __future__ import annotations

import csv
import io
import json
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "MalformedTrialError",
    "PermutationTrialSet",
    "DistanceHistogram",
    "EntropyScore",
    "IngestDiagnostics",
    "distance_histogram",
    "entropy_score",
    "uniform_shuffle_oracle",
    "convergence_sweep",
    "ingest_trials",
]


class MalformedTrialError(ValueError):
    """A recorded trial is not a permutation of 0..N-1."""

    def __init__(self, index: int, message: str) -> None:
        super().__init__(f"trial {index}: {message}")
        self.index = index


def _validate_trial(trial: Sequence[int], n: int, index: int) -> None:
    if len(trial) != n:
        raise MalformedTrialError(index, f"expected {n} labels, got {len(trial)}")
    if sorted(trial) != list(range(n)):
        raise MalformedTrialError(index, "not a permutation of 0..N-1")


class PermutationTrialSet:
    """A validated list of deck orderings over N labeled cards."""

    __slots__ = ("n", "trials", "source_label")

    def __init__(self, n: int, trials, source_label: str = "") -> None:
        if n < 3:
            raise ValueError(f"card count must be >= 3, got {n}")
        arr = np.array(trials, dtype=np.int64)
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise ValueError("trials must be a nonempty list of orderings")
        for i, row in enumerate(arr.tolist()):
            _validate_trial(row, n, i)
        arr.setflags(write=False)
        self.n = n
        self.trials = arr
        self.source_label = source_label

    def __len__(self) -> int:
        return int(self.trials.shape[0])


@dataclass(frozen=True)
class DistanceHistogram:
    """counts[i, j, d] = number of trials with |pos(i) - pos(j)| = d, for i < j."""

    n: int
    counts: np.ndarray
    num_trials: int

    def pair_counts(self, i: int, j: int) -> np.ndarray:
        """Distance tallies for one unordered pair, index d = 1..N-1."""
        if i == j:
            raise ValueError("pair indices must differ")
        i, j = min(i, j), max(i, j)
        return self.counts[i, j]


@dataclass(frozen=True)
class EntropyScore:
    """Minimum pair entropy as a fraction of the maximum, plus which pair hit it."""

    h: float
    argmin_pair: tuple[int, int]


def distance_histogram(trial_set: PermutationTrialSet) -> DistanceHistogram:
    """Tally pairwise positional distances over all trials."""
    n = trial_set.n
    positions = np.argsort(trial_set.trials, axis=1)
    counts = np.zeros((n, n, n), dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            d = np.abs(positions[:, i] - positions[:, j])
            counts[i, j] = np.bincount(d, minlength=n)
    return DistanceHistogram(n=n, counts=counts, num_trials=len(trial_set))


def entropy_score(hist: DistanceHistogram) -> EntropyScore:
    """Minimum over pairs of the base-(N-1) entropy of the distance distribution.

    Empty cells follow the 0*log(0) = 0 convention.  Requires N >= 3 (the
    log base is N-1) and at least one counted trial per pair.
    """
    n = hist.n
    if n < 3:
        raise ValueError("entropy base N-1 requires N >= 3")
    log_base = math.log(n - 1)
    best = math.inf
    best_pair = (0, 1)
    for i in range(n):
        for j in range(i + 1, n):
            counts = hist.counts[i, j, 1:n].astype(np.float64)
            total = counts.sum()
            if total <= 0:
                raise ValueError(f"pair ({i}, {j}) has no counted trials")
            q = counts / total
            nz = q > 0
            h = float(-(q[nz] * np.log(q[nz])).sum() / log_base)
            if h < best:
                best = h
                best_pair = (i, j)
    return EntropyScore(h=min(1.0, max(0.0, best)), argmin_pair=best_pair)


def uniform_shuffle_oracle(n: int, trials: int, seed: int) -> PermutationTrialSet:
    """Generate independent uniform permutations with a seeded Fisher-Yates.

    The swap-based shuffle is unbiased (each of the N! orderings equally
    likely) and fully reproducible for a fixed seed.
    """
    if n < 3:
        raise ValueError(f"card count must be >= 3, got {n}")
    if trials < 1:
        raise ValueError(f"trial count must be >= 1, got {trials}")
    rng = random.Random(seed)
    out = np.empty((trials, n), dtype=np.int64)
    for t in range(trials):
        deck = list(range(n))
        for k in range(n - 1, 0, -1):
            j = rng.randrange(k + 1)
            deck[k], deck[j] = deck[j], deck[k]
        out[t] = deck
    return PermutationTrialSet(n, out, source_label=f"uniform-oracle(seed={seed})")


def convergence_sweep(
    n: int,
    round_counts: Sequence[int],
    provider: Callable[[int], PermutationTrialSet],
) -> list[tuple[int, float]]:
    """Entropy score per round count, each computed on a fresh trial batch.

    ``provider(rounds)`` must return a trial set of that size; scores are
    independent per row (no accumulation across rows).
    """
    counts = list(round_counts)
    if counts != sorted(counts):
        raise ValueError("round counts must be ascending")
    if not counts:
        raise ValueError("round counts must be nonempty")
    series = []
    for rounds in counts:
        trial_set = provider(rounds)
        if trial_set.n != n:
            raise ValueError(f"provider returned N={trial_set.n}, expected {n}")
        score = entropy_score(distance_histogram(trial_set))
        series.append((rounds, score.h))
    return series


@dataclass(frozen=True)
class IngestDiagnostics:
    """What happened while reading a trial file."""

    dropped: int
    shortfall: int
    expected: Optional[int]
    received: int

    def as_dict(self) -> dict:
        return {
            "dropped": self.dropped,
            "shortfall": self.shortfall,
            "expected": self.expected,
            "received": self.received,
        }


def _load_trial_rows(path: Path, fmt: Optional[str]) -> list[list[int]]:
    fmt = fmt or ("json" if path.suffix.lower() == ".json" else "csv")
    text = path.read_text(encoding="utf-8")
    if fmt == "json":
        data = json.loads(text)
        if not isinstance(data, list):
            raise ValueError(f"{path}: expected a JSON array of orderings")
        return [list(row) if isinstance(row, list) else [row] for row in data]
    rows = []
    for row in csv.reader(io.StringIO(text)):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        rows.append([int(tok) for tok in row if tok.strip()])
    return rows


def ingest_trials(
    path: str | Path,
    n: int,
    expected: Optional[int] = None,
    fmt: Optional[str] = None,
) -> tuple[PermutationTrialSet, IngestDiagnostics]:
    """Read recorded orderings, dropping rows that are not permutations.

    Models often deliver fewer trials than asked or corrupt individual rows,
    so partial files are accepted; the diagnostics record how many rows were
    dropped and any shortfall against ``expected``.

    Raises:
        ValueError: if the file is unreadable, malformed beyond row level,
            or contains zero valid trials.
    """
    path = Path(path)
    rows = _load_trial_rows(path, fmt)
    valid = []
    dropped = 0
    for row in rows:
        try:
            _validate_trial(row, n, len(valid))
        except MalformedTrialError:
            dropped += 1
            continue
        valid.append(row)
    if not valid:
        raise ValueError(f"{path}: no valid trials of {n} cards found")
    shortfall = max(0, expected - len(valid)) if expected is not None else 0
    diagnostics = IngestDiagnostics(
        dropped=dropped,
        shortfall=shortfall,
        expected=expected,
        received=len(rows),
    )
    trial_set = PermutationTrialSet(n, np.array(valid, dtype=np.int64), source_label=str(path))
    return trial_set, diagnostics
