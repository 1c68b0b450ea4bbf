"""Randomness-evaluation toolkit.

Scores number sequences with a nine-test statistical battery
(OK/SUSPECT/KO per p-value), grades shuffles by pairwise-distance
min-entropy, analyzes generated character corpora, and records LLM
transcripts for offline scoring.
"""

__version__ = "0.1.0"

from .battery import (
    BatteryConfig,
    InsufficientBitsError,
    TestResult,
    binary_rank,
    block_frequency,
    linear_complexity,
    longest_run_of_ones,
    monobit,
    run_battery,
    runs,
    serial,
    sign_test,
    spectral,
)
from .bitstream import BitSequence, IntegerSample, from_integers, from_text
from .numerics import dft_moduli, erfc, igamc
from .shuffle import (
    DistanceHistogram,
    EntropyScore,
    PermutationTrialSet,
    convergence_sweep,
    distance_histogram,
    entropy_score,
    ingest_trials,
    uniform_shuffle_oracle,
)
from .sources import SampleSource, draw_integers, ingest_transcript
from .verdict import BatteryReport, Verdict, aggregate, classify

__all__ = [
    "__version__",
    "BatteryConfig",
    "BatteryReport",
    "BitSequence",
    "DistanceHistogram",
    "EntropyScore",
    "InsufficientBitsError",
    "IntegerSample",
    "PermutationTrialSet",
    "SampleSource",
    "TestResult",
    "Verdict",
    "aggregate",
    "binary_rank",
    "block_frequency",
    "classify",
    "convergence_sweep",
    "dft_moduli",
    "distance_histogram",
    "draw_integers",
    "entropy_score",
    "erfc",
    "from_integers",
    "from_text",
    "igamc",
    "ingest_transcript",
    "ingest_trials",
    "linear_complexity",
    "longest_run_of_ones",
    "monobit",
    "run_battery",
    "runs",
    "serial",
    "sign_test",
    "spectral",
    "uniform_shuffle_oracle",
]
