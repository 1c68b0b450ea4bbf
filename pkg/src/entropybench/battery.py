"""The nine statistical randomness tests and the battery runner.

Statistics and reference constants follow NIST SP 800-22 rev 1a; the
constant tables below carry their section provenance.  Every test maps a
bit sequence (the sign test a numeric sample) to one or two p-values plus a
diagnostic statistic.  Tests below their recommended input size compute
anyway and attach a warning, so short experimental samples can still be
scored; structural impossibilities (no bits, fewer bits than one block)
raise instead.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .bitstream import BitSequence, IntegerSample
from .gf2 import gf2_rank_batch
from .lfsr import berlekamp_massey
from .numerics import dft_moduli, erfc, igamc
from .verdict import SKIPPED, Verdict, classify

__all__ = [
    "InsufficientBitsError",
    "TestResult",
    "BatteryConfig",
    "monobit",
    "block_frequency",
    "runs",
    "longest_run_of_ones",
    "binary_rank",
    "linear_complexity",
    "serial",
    "spectral",
    "sign_test",
    "run_battery",
    "TEST_NAMES",
]


class InsufficientBitsError(ValueError):
    """Raised when a test cannot run at all on the given input size."""


# ---------------------------------------------------------------------------
# Reference constants (NIST SP 800-22 rev 1a).
# ---------------------------------------------------------------------------

# Longest-run-of-ones parameter sets, keyed by minimum sequence length:
# (min_n, block_len M, lowest category, highest category, category probs).
# Sections 2.4.2 and 2.4.4.
_LONGEST_RUN_PARAMS = (
    (128, 8, 1, 4, (0.2148, 0.3672, 0.2305, 0.1875)),
    (6272, 128, 4, 9, (0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124)),
    (750000, 10000, 10, 16, (0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727)),
)

# Binary-rank category probabilities for 32x32 matrices over GF(2):
# P(rank 32), P(rank 31), P(rank <= 30).  Section 3.5.
_RANK_PROBS = (0.2888, 0.5776, 0.1336)
_RANK_MATRIX_BITS = 32 * 32
_RANK_MIN_MATRICES = 38  # section 2.5.7: n >= 38 * 32 * 32

# Linear-complexity category probabilities for T in
# (-inf,-2.5], (-2.5,-1.5], ..., (1.5,2.5], (2.5,inf).  Section 3.10.
_LC_PROBS = (0.010417, 0.03125, 0.125, 0.5, 0.25, 0.0625, 0.020833)

# Spectral threshold uses the 95th percentile of the peak distribution:
# T = sqrt(n * ln(1/0.05)).  Section 2.6.
_SPECTRAL_LOG = math.log(1.0 / 0.05)


@dataclass(frozen=True)
class TestResult:
    """Outcome of one test: p-value(s), verdicts, and diagnostics."""

    test_name: str
    p_values: tuple[float, ...]
    statistic: Optional[float]
    verdicts: tuple[Verdict, ...]
    n_used: int
    warnings: tuple[str, ...] = ()
    skipped: bool = False
    skipped_reason: Optional[str] = None

    def as_dict(self) -> dict:
        if self.skipped:
            return {
                "test": self.test_name,
                "skipped": True,
                "reason": self.skipped_reason,
            }
        return {
            "test": self.test_name,
            "p_values": [round(p, 12) for p in self.p_values],
            "statistic": round(self.statistic, 12) if self.statistic is not None else None,
            "verdicts": [v.label for v in self.verdicts],
            "n_used": self.n_used,
            "warnings": list(self.warnings),
        }


def _result(
    name: str,
    p_values: Sequence[float],
    statistic: float,
    n_used: int,
    warnings: Sequence[str] = (),
) -> TestResult:
    ps = tuple(min(1.0, max(0.0, float(p))) for p in p_values)
    return TestResult(
        test_name=name,
        p_values=ps,
        statistic=float(statistic),
        verdicts=tuple(classify(p) for p in ps),
        n_used=n_used,
        warnings=tuple(warnings),
    )


def _skipped(name: str, reason: str) -> TestResult:
    return TestResult(
        test_name=name,
        p_values=(),
        statistic=None,
        verdicts=(Verdict(SKIPPED),),
        n_used=0,
        skipped=True,
        skipped_reason=reason,
    )


@dataclass(frozen=True)
class BatteryConfig:
    """Battery parameters; the defaults target 80,000-bit 8-bit samples."""

    block_frequency_m: int = 128
    serial_m: int = 5
    linear_complexity_m: int = 500
    bit_width: int = 8

    @classmethod
    def from_json(cls, text: str) -> "BatteryConfig":
        """Parse the battery-parameter JSON document.

        Accepted keys: block_frequency_M, serial_m, linear_complexity_M,
        bit_width.  Missing keys keep their defaults; unknown keys are
        rejected so typos do not silently fall back.
        """
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ValueError("battery config must be a JSON object")
        known = {
            "block_frequency_M": "block_frequency_m",
            "serial_m": "serial_m",
            "linear_complexity_M": "linear_complexity_m",
            "bit_width": "bit_width",
        }
        unknown = set(data) - set(known) - {"sources"}
        if unknown:
            raise ValueError(f"unknown battery config keys: {sorted(unknown)}")
        kwargs = {}
        for key, attr in known.items():
            if key in data:
                value = data[key]
                if not isinstance(value, int) or value < 1:
                    raise ValueError(f"{key} must be a positive integer")
                kwargs[attr] = value
        return cls(**kwargs)


# ---------------------------------------------------------------------------
# Individual tests.
# ---------------------------------------------------------------------------


def monobit(seq: BitSequence) -> TestResult:
    """Balance of ones and zeros over the whole sequence.

    S = sum(2*bit - 1); p = erfc(|S| / sqrt(2n)).
    """
    n = len(seq)
    if n == 0:
        raise InsufficientBitsError("monobit requires a nonempty sequence")
    warnings = [] if n >= 100 else [f"n={n} below recommended minimum 100"]
    s = 2 * seq.count_ones() - n
    s_obs = abs(s) / math.sqrt(n)
    p = erfc(s_obs / math.sqrt(2.0))
    return _result("monobit", [p], s_obs, n, warnings)


def block_frequency(seq: BitSequence, block_len: int = 128) -> TestResult:
    """Ones-fraction balance within fixed-size blocks.

    chi^2 = 4M * sum_i (pi_i - 1/2)^2 over N = floor(n/M) blocks;
    p = igamc(N/2, chi^2/2).  Trailing remainder bits are discarded.
    """
    n = len(seq)
    m = block_len
    if m < 2:
        raise ValueError("block length must be >= 2")
    if n < m:
        raise InsufficientBitsError(f"need at least {m} bits, got {n}")
    num_blocks = n // m
    pi = seq.bits[: num_blocks * m].reshape(num_blocks, m).mean(axis=1)
    chi2 = 4.0 * m * float(((pi - 0.5) ** 2).sum())
    p = igamc(num_blocks / 2.0, chi2 / 2.0)
    return _result("block_frequency", [p], chi2, num_blocks * m)


def runs(seq: BitSequence) -> TestResult:
    """Count of maximal runs versus the expectation for the observed bias.

    Prerequisite gate: if |pi - 1/2| >= 2/sqrt(n) the sequence is too biased
    for the run count to mean anything; the test reports p = 0 with a
    gate-failure diagnostic instead of erroring, so grossly biased samples
    still get scored.
    """
    n = len(seq)
    if n == 0:
        raise InsufficientBitsError("runs requires a nonempty sequence")
    warnings = [] if n >= 100 else [f"n={n} below recommended minimum 100"]
    pi = seq.count_ones() / n
    if abs(pi - 0.5) >= 2.0 / math.sqrt(n) or pi in (0.0, 1.0):
        warnings.append(f"frequency gate failed (pi={pi:.4f}); p forced to 0")
        return _result("runs", [0.0], 0.0, n, warnings)
    bits = seq.bits
    v_obs = 1 + int((bits[1:] != bits[:-1]).sum())
    pp = pi * (1.0 - pi)
    p = erfc(abs(v_obs - 2.0 * n * pp) / (2.0 * math.sqrt(2.0 * n) * pp))
    return _result("runs", [p], float(v_obs), n, warnings)


def _longest_one_run(row: np.ndarray) -> int:
    # Gap lengths between zeros = runs of ones.
    zeros = np.flatnonzero(row == 0)
    edges = np.concatenate(([-1], zeros, [row.size]))
    return int(np.max(np.diff(edges)) - 1)


def longest_run_of_ones(seq: BitSequence) -> TestResult:
    """Distribution of the longest 1-run per block against reference probabilities.

    Block size escalates with n (8 / 128 / 10^4); each block's longest run is
    tallied into the reference categories for that size and tested with
    chi^2, p = igamc(K/2, chi^2/2).
    """
    n = len(seq)
    if n < 128:
        raise InsufficientBitsError(f"longest-run test requires n >= 128, got {n}")
    for min_n, m, lo, hi, probs in reversed(_LONGEST_RUN_PARAMS):
        if n >= min_n:
            break
    num_blocks = n // m
    blocks = seq.bits[: num_blocks * m].reshape(num_blocks, m)
    tally = np.zeros(hi - lo + 1, dtype=np.int64)
    for row in blocks:
        longest = _longest_one_run(row)
        tally[min(hi, max(lo, longest)) - lo] += 1
    expected = num_blocks * np.asarray(probs)
    chi2 = float(((tally - expected) ** 2 / expected).sum())
    k = hi - lo
    p = igamc(k / 2.0, chi2 / 2.0)
    return _result("longest_run_of_ones", [p], chi2, num_blocks * m)


def binary_rank(seq: BitSequence) -> TestResult:
    """GF(2) rank distribution of 32x32 matrices filled row-major.

    Tallies {rank 32, rank 31, rank <= 30} against the reference
    probabilities; chi^2 has 2 degrees of freedom, so p = exp(-chi^2/2).
    """
    n = len(seq)
    min_bits = _RANK_MIN_MATRICES * _RANK_MATRIX_BITS
    if n < min_bits:
        raise InsufficientBitsError(
            f"binary-rank test requires n >= {min_bits} (38 matrices), got {n}"
        )
    num = n // _RANK_MATRIX_BITS
    cube = seq.bits[: num * _RANK_MATRIX_BITS].reshape(num, 32, 32).astype(np.uint64)
    shifts = np.arange(32, dtype=np.uint64)
    packed = (cube << shifts[None, None, :]).sum(axis=2, dtype=np.uint64)
    ranks = gf2_rank_batch(packed, ncols=32)
    counts = np.array(
        [int((ranks == 32).sum()), int((ranks == 31).sum()), int((ranks <= 30).sum())]
    )
    expected = num * np.asarray(_RANK_PROBS)
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    p = math.exp(-chi2 / 2.0)
    return _result("binary_rank", [p], chi2, num * _RANK_MATRIX_BITS)


def linear_complexity(seq: BitSequence, block_len: int = 500) -> TestResult:
    """Berlekamp-Massey LFSR length distribution over fixed-size blocks.

    Each block's length L is centered with the theoretical mean mu and
    tallied into seven categories; p = igamc(3, chi^2/2).
    """
    n = len(seq)
    m = block_len
    if not (500 <= m <= 5000):
        raise ValueError(f"linear-complexity block length must be in [500, 5000], got {m}")
    if n < m:
        raise InsufficientBitsError(f"need at least {m} bits, got {n}")
    num_blocks = n // m
    warnings = []
    if num_blocks < 200:
        warnings.append(f"only {num_blocks} blocks, below recommended 200")
    sign = -1.0 if m % 2 else 1.0
    mu = m / 2.0 + (9.0 + (-1.0) ** (m + 1)) / 36.0 - (m / 3.0 + 2.0 / 9.0) / 2.0**m
    blocks = seq.bits[: num_blocks * m].reshape(num_blocks, m)
    tally = np.zeros(7, dtype=np.int64)
    for row in blocks.tolist():
        t = sign * (berlekamp_massey(row) - mu) + 2.0 / 9.0
        if t <= -2.5:
            tally[0] += 1
        elif t > 2.5:
            tally[6] += 1
        else:
            # categories are the half-open intervals (k - 0.5, k + 0.5]
            tally[int(math.ceil(t + 2.5))] += 1
    expected = num_blocks * np.asarray(_LC_PROBS)
    chi2 = float(((tally - expected) ** 2 / expected).sum())
    p = igamc(3.0, chi2 / 2.0)
    return _result("linear_complexity", [p], chi2, num_blocks * m, warnings)


def _psi_squared(bits: np.ndarray, k: int) -> float:
    # Overlapping k-bit pattern imbalance with cyclic wraparound; every
    # position contributes exactly one pattern, so counts sum to n.
    n = bits.size
    if k == 0:
        return 0.0
    ext = np.concatenate([bits, bits[: k - 1]])
    windows = np.zeros(n, dtype=np.int64)
    for i in range(k):
        windows = (windows << 1) | ext[i : i + n]
    counts = np.bincount(windows, minlength=2**k)
    assert counts.sum() == n, "cyclic counting must place every position once"
    return (2.0**k / n) * float((counts.astype(np.float64) ** 2).sum()) - n


def serial(seq: BitSequence, m: int = 5) -> TestResult:
    """Frequency balance of overlapping m-bit patterns (cyclic counting).

    psi^2 is computed for pattern lengths m, m-1, m-2; the first and second
    differences give two p-values:
    p1 = igamc(2^(m-2), (psi_m - psi_{m-1})/2),
    p2 = igamc(2^(m-3), (psi_m - 2 psi_{m-1} + psi_{m-2})/2).
    """
    n = len(seq)
    if m < 2:
        raise ValueError(f"serial requires m >= 2, got {m}")
    if m > 20:
        raise ValueError(f"serial pattern length {m} is unreasonably large")
    if n < m:
        raise InsufficientBitsError(f"need at least m={m} bits, got {n}")
    warnings = []
    if m >= max(1, int(math.floor(math.log2(n))) - 2):
        warnings.append(f"m={m} above recommended bound log2(n)-3 for n={n}")
    bits = seq.bits
    psi_m = _psi_squared(bits, m)
    psi_m1 = _psi_squared(bits, m - 1)
    psi_m2 = _psi_squared(bits, m - 2)
    del1 = psi_m - psi_m1
    del2 = psi_m - 2.0 * psi_m1 + psi_m2
    p1 = igamc(2.0 ** (m - 2), del1 / 2.0)
    p2 = igamc(2.0 ** (m - 3), del2 / 2.0)
    return _result("serial", [p1, p2], del1, n, warnings)


def spectral(seq: BitSequence) -> TestResult:
    """Excess of large DFT peaks over the 95% threshold.

    X = 2*bits - 1; T = sqrt(n ln(1/0.05)); N1 counts moduli below T among
    the first floor(n/2) coefficients; d = (N1 - 0.95n/2) /
    sqrt(n*0.95*0.05/4); p = erfc(|d|/sqrt(2)).
    """
    n = len(seq)
    if n < 2:
        raise InsufficientBitsError("spectral test requires n >= 2")
    warnings = [] if n >= 1000 else [f"n={n} below recommended minimum 1000"]
    x = 2.0 * seq.bits.astype(np.float64) - 1.0
    moduli = dft_moduli(x)
    threshold = math.sqrt(n * _SPECTRAL_LOG)
    n1 = int((moduli < threshold).sum())
    n0 = 0.95 * n / 2.0
    d = (n1 - n0) / math.sqrt(n * 0.95 * 0.05 / 4.0)
    p = erfc(abs(d) / math.sqrt(2.0))
    return _result("spectral", [p], d, n, warnings)


def sign_test(sample: IntegerSample) -> TestResult:
    """Balance of values above versus below the midpoint of the declared range.

    The reference median is declared_max/2 (127.5 for 8-bit samples), not
    the sample median -- splitting on the sample's own median would balance
    by construction and test nothing.  Exact ties are excluded.
    """
    if len(sample) == 0:
        raise ValueError("sign test requires a nonempty sample")
    median = sample.declared_max / 2.0
    above = int((sample.values > median).sum())
    below = int((sample.values < median).sum())
    if above + below == 0:
        raise ValueError("all values tie the reference median; nothing to test")
    p = erfc(abs(above - below) / math.sqrt(2.0 * (above + below)))
    return _result("sign", [p], float(above - below), above + below)


# ---------------------------------------------------------------------------
# Battery runner.
# ---------------------------------------------------------------------------

TEST_NAMES = (
    "binary_rank",
    "block_frequency",
    "linear_complexity",
    "longest_run_of_ones",
    "monobit",
    "runs",
    "serial",
    "sign",
    "spectral",
)


def run_battery(
    seq: BitSequence,
    sample: Optional[IntegerSample] = None,
    config: Optional[BatteryConfig] = None,
) -> list[TestResult]:
    """Run all nine tests; results are ordered by test name.

    Tests whose preconditions fail contribute a SKIPPED entry instead of
    aborting the battery.  The sign test runs only when a numeric sample is
    supplied.  Identical inputs produce identical results.
    """
    cfg = config or BatteryConfig()
    calls = {
        "binary_rank": lambda: binary_rank(seq),
        "block_frequency": lambda: block_frequency(seq, cfg.block_frequency_m),
        "linear_complexity": lambda: linear_complexity(seq, cfg.linear_complexity_m),
        "longest_run_of_ones": lambda: longest_run_of_ones(seq),
        "monobit": lambda: monobit(seq),
        "runs": lambda: runs(seq),
        "serial": lambda: serial(seq, cfg.serial_m),
        "spectral": lambda: spectral(seq),
    }
    results = []
    for name in TEST_NAMES:
        if name == "sign":
            if sample is None:
                results.append(_skipped("sign", "no numeric sample supplied"))
                continue
            call = lambda: sign_test(sample)
        else:
            call = calls[name]
        try:
            results.append(call())
        except ValueError as exc:
            results.append(_skipped(name, str(exc)))
    return results
