"""Three-way classification of p-values and battery-level aggregation.

Classification bands (total over [0, 1], one label per p):

    KO       p < 0.01  or  p > 0.99     -- statistically significant failure
    SUSPECT  0.01 <= p <= 0.1, or p exactly 0.99   -- re-test advised
    OK       0.1 < p < 0.99             -- consistent with randomness

Boundary points land on the re-test side.  A generator producing uniform
p-values scores about 89% OK / 9% SUSPECT / 2% KO under these bands, which
is what healthy local generators measure in practice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

__all__ = [
    "OK",
    "SUSPECT",
    "KO",
    "SKIPPED",
    "Verdict",
    "BatteryReport",
    "classify",
    "aggregate",
    "report_as_dict",
    "format_table",
]

OK = "OK"
SUSPECT = "SUSPECT"
KO = "KO"
SKIPPED = "SKIPPED"


@dataclass(frozen=True)
class Verdict:
    """A label plus the p-value it classifies (p is None for SKIPPED)."""

    label: str
    p: Optional[float] = None


def classify(p: float) -> Verdict:
    """Classify one p-value into OK / SUSPECT / KO.

    Raises:
        ValueError: if p is outside [0, 1] or not a number.
    """
    if isinstance(p, bool) or not isinstance(p, (int, float)) or math.isnan(p):
        raise ValueError(f"p-value must be a number in [0, 1], got {p!r}")
    if p < 0.0 or p > 1.0:
        raise ValueError(f"p-value must be in [0, 1], got {p}")
    if p < 0.01 or p > 0.99:
        return Verdict(KO, p)
    if p <= 0.1 or p == 0.99:
        return Verdict(SUSPECT, p)
    return Verdict(OK, p)


@dataclass(frozen=True)
class BatteryReport:
    """Aggregate outcome of one battery run over one sample source."""

    source_label: str
    results: tuple
    ok_pct: float
    suspect_pct: float
    ko_pct: float
    n_classified: int
    n_skipped: int

    @property
    def counts(self) -> dict[str, int]:
        tally = {OK: 0, SUSPECT: 0, KO: 0}
        for result in self.results:
            for verdict in result.verdicts:
                if verdict.label in tally:
                    tally[verdict.label] += 1
        return tally


def aggregate(results: Sequence, source_label: str) -> BatteryReport:
    """Fold per-test results into OK/SUSPECT/KO percentages.

    Each classified p-value counts once (a two-p-value serial result
    contributes two classifications); SKIPPED entries are excluded from the
    percentages and reported separately.

    Raises:
        ValueError: if results is empty.
    """
    if not results:
        raise ValueError("cannot aggregate an empty result list")
    tally = {OK: 0, SUSPECT: 0, KO: 0}
    skipped = 0
    for result in results:
        if result.skipped:
            skipped += 1
            continue
        for verdict in result.verdicts:
            tally[verdict.label] += 1
    classified = sum(tally.values())
    if classified == 0:
        pct = {OK: 0.0, SUSPECT: 0.0, KO: 0.0}
    else:
        pct = {label: 100.0 * count / classified for label, count in tally.items()}
    return BatteryReport(
        source_label=source_label,
        results=tuple(results),
        ok_pct=pct[OK],
        suspect_pct=pct[SUSPECT],
        ko_pct=pct[KO],
        n_classified=classified,
        n_skipped=skipped,
    )


def report_as_dict(report: BatteryReport) -> dict:
    """JSON-ready form of a battery report (no timestamps, stable order)."""
    return {
        "source": report.source_label,
        "summary": {
            "ok_pct": round(report.ok_pct, 4),
            "suspect_pct": round(report.suspect_pct, 4),
            "ko_pct": round(report.ko_pct, 4),
            "classified": report.n_classified,
            "skipped": report.n_skipped,
        },
        "results": [result.as_dict() for result in report.results],
    }


def format_table(reports: Sequence[BatteryReport]) -> str:
    """Aligned plain-text outcome table, one row per source."""
    headers = ("Generation Method", "OK", "SUSPECT", "KO")
    rows = [
        (
            report.source_label,
            f"{report.ok_pct:.2f}%",
            f"{report.suspect_pct:.2f}%",
            f"{report.ko_pct:.2f}%",
        )
        for report in reports
    ]
    widths = [
        max(len(headers[i]), *(len(row[i]) for row in rows)) if rows else len(headers[i])
        for i in range(4)
    ]
    lines = [
        "  ".join(headers[i].ljust(widths[i]) for i in range(4)),
        "  ".join("-" * widths[i] for i in range(4)),
    ]
    for row in rows:
        lines.append("  ".join(row[i].ljust(widths[i]) for i in range(4)))
    return "\n".join(lines)
