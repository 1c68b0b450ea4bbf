"""Statistical analysis of generated character sequences.

Covers the three checks applied to password corpora: per-character frequency
against a uniform alphabet, substrings shared across distinct passwords, and
exact duplicate passwords.  The alphabet is always declared explicitly --
frequency numbers are meaningless without knowing what was permitted.
"""

from __future__ import annotations

import string
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

from .bitstream import BitSequence, from_text
from .numerics import igamc
from .verdict import Verdict, classify

__all__ = [
    "DEFAULT_ALPHABET",
    "PasswordCorpus",
    "FrequencyReport",
    "RepeatsReport",
    "char_frequency",
    "repeated_substring_scan",
    "corpus_to_bits",
]

# Letters, digits, and a fixed dozen specials.  Callers with a different
# permitted set must say so; reports echo the alphabet in use.
DEFAULT_ALPHABET = string.ascii_uppercase + string.ascii_lowercase + string.digits + "!@#$%^&*()-_"

# Chi-square cells need about this much expected mass to be trustworthy;
# sparser alphabets get pooled into contiguous groups.
_MIN_EXPECTED = 5.0


class PasswordCorpus:
    """A list of passwords plus the alphabet they were supposed to use.

    Characters outside the alphabet are recorded (per character, with
    counts) rather than rejected: non-compliant generator output is exactly
    what this module exists to measure.
    """

    __slots__ = ("passwords", "alphabet", "violations")

    def __init__(self, passwords: Sequence[str], alphabet: str = DEFAULT_ALPHABET) -> None:
        if len(set(alphabet)) != len(alphabet):
            raise ValueError("alphabet contains duplicate characters")
        if len(alphabet) < 2:
            raise ValueError("alphabet must have at least 2 characters")
        self.passwords = list(passwords)
        self.alphabet = alphabet
        allowed = set(alphabet)
        violations: Counter[str] = Counter()
        for pw in self.passwords:
            for ch in pw:
                if ch not in allowed:
                    violations[ch] += 1
        self.violations = dict(violations)

    def total_chars(self) -> int:
        return sum(len(pw) for pw in self.passwords)

    def __len__(self) -> int:
        return len(self.passwords)


@dataclass(frozen=True)
class FrequencyReport:
    """Per-character tallies and a chi-square uniformity verdict."""

    counts: dict[str, int]
    other: dict[str, int]
    total: int
    chi2: float
    p: float
    verdict: Verdict
    pooled_groups: Optional[int]

    def as_dict(self) -> dict:
        return {
            "counts": self.counts,
            "other": self.other,
            "total": self.total,
            "chi2": round(self.chi2, 10),
            "p": round(self.p, 12),
            "verdict": self.verdict.label,
            "pooled_groups": self.pooled_groups,
        }


def char_frequency(corpus: PasswordCorpus) -> FrequencyReport:
    """Character tallies plus a chi-square test against the uniform alphabet.

    Out-of-alphabet characters are tallied in a separate bucket and excluded
    from the uniformity statistic.  When the per-character expected count
    falls below 5 the alphabet is pooled into contiguous groups and the
    grouping is reported.

    Raises:
        ValueError: on an empty corpus (or one with no in-alphabet chars).
    """
    if not corpus.passwords:
        raise ValueError("cannot analyze an empty corpus")
    alphabet = corpus.alphabet
    counts = {ch: 0 for ch in alphabet}
    other: Counter[str] = Counter()
    for pw in corpus.passwords:
        for ch in pw:
            if ch in counts:
                counts[ch] += 1
            else:
                other[ch] += 1
    total = sum(counts.values())
    if total == 0:
        raise ValueError("corpus has no in-alphabet characters")

    k = len(alphabet)
    groups = k
    if total / k < _MIN_EXPECTED:
        groups = max(2, min(k, int(total // _MIN_EXPECTED)))
    if groups == k:
        observed = [counts[ch] for ch in alphabet]
        probs = [1.0 / k] * k
        pooled = None
    else:
        # contiguous slices of the alphabet, sizes differing by at most one
        observed, probs = [], []
        base, extra = divmod(k, groups)
        start = 0
        for g in range(groups):
            size = base + (1 if g < extra else 0)
            chunk = alphabet[start : start + size]
            observed.append(sum(counts[ch] for ch in chunk))
            probs.append(size / k)
            start += size
        pooled = groups
    chi2 = sum(
        (obs - total * pr) ** 2 / (total * pr) for obs, pr in zip(observed, probs)
    )
    p = igamc((len(observed) - 1) / 2.0, chi2 / 2.0)
    return FrequencyReport(
        counts=counts,
        other=dict(other),
        total=total,
        chi2=chi2,
        p=p,
        verdict=classify(p),
        pooled_groups=pooled,
    )


@dataclass(frozen=True)
class RepeatsReport:
    """Shared substrings and duplicate passwords found in a corpus."""

    repeats: tuple[tuple[str, int], ...]  # (substring, distinct passwords containing it)
    duplicate_groups: tuple[tuple[str, int], ...]  # (password, copies) for copies >= 2
    duplicate_pairs: int

    def as_dict(self) -> dict:
        return {
            "repeats": [[s, c] for s, c in self.repeats],
            "duplicates": [[pw, c] for pw, c in self.duplicate_groups],
            "duplicate_pairs": self.duplicate_pairs,
        }


def repeated_substring_scan(corpus: PasswordCorpus, min_len: int = 3) -> RepeatsReport:
    """Find substrings of length >= min_len shared by >= 2 distinct passwords.

    The sweep grows candidate windows one character at a time, keeping only
    windows still present in two or more passwords (any longer shared
    substring implies its sub-windows are shared too, so nothing is missed).
    A found substring is reported only if it is maximal: every one-character
    extension appears in strictly fewer passwords.  Exact duplicate
    passwords are counted separately, as pairs.

    Raises:
        ValueError: if min_len < 2.
    """
    if min_len < 2:
        raise ValueError("min_len must be >= 2")
    passwords = corpus.passwords

    def windows_of(length: int) -> dict[str, set[int]]:
        found: dict[str, set[int]] = {}
        for idx, pw in enumerate(passwords):
            for start in range(len(pw) - length + 1):
                found.setdefault(pw[start : start + length], set()).add(idx)
        return found

    # Counts per surviving substring, per length.
    survivors: dict[int, dict[str, int]] = {}
    length = min_len
    current = {s: ids for s, ids in windows_of(min_len).items() if len(ids) >= 2}
    while current:
        survivors[length] = {s: len(ids) for s, ids in current.items()}
        length += 1
        extended: dict[str, set[int]] = {}
        for idx, pw in enumerate(passwords):
            for start in range(len(pw) - length + 1):
                sub = pw[start : start + length]
                if sub[:-1] in current:
                    extended.setdefault(sub, set()).add(idx)
        current = {s: ids for s, ids in extended.items() if len(ids) >= 2}

    repeats = []
    for length, table in survivors.items():
        longer = survivors.get(length + 1, {})
        for sub, count in table.items():
            grew = any(
                ext in longer and longer[ext] == count
                for ext in _extensions(sub, passwords)
            )
            if not grew:
                repeats.append((sub, count))
    repeats.sort(key=lambda item: (-item[1], -len(item[0]), item[0]))

    copies = Counter(passwords)
    duplicate_groups = tuple(
        (pw, c) for pw, c in sorted(copies.items()) if c >= 2
    )
    duplicate_pairs = sum(c * (c - 1) // 2 for _, c in duplicate_groups)
    return RepeatsReport(
        repeats=tuple(repeats),
        duplicate_groups=duplicate_groups,
        duplicate_pairs=duplicate_pairs,
    )


def _extensions(sub: str, passwords: Sequence[str]) -> set[str]:
    # One-character left/right extensions of ``sub`` that actually occur.
    out: set[str] = set()
    width = len(sub)
    for pw in passwords:
        start = pw.find(sub)
        while start != -1:
            if start > 0:
                out.add(pw[start - 1 : start + width])
            if start + width < len(pw):
                out.add(pw[start : start + width + 1])
            start = pw.find(sub, start + 1)
    return out


def corpus_to_bits(corpus: PasswordCorpus) -> BitSequence:
    """Encode the corpus for the bit-level battery (8-bit code points)."""
    if not corpus.passwords:
        raise ValueError("cannot encode an empty corpus")
    return from_text(corpus.passwords, encoding_width=8)
