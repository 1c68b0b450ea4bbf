import json
import math
import random

import numpy as np
import pytest

from entropybench.shuffle import (
    DistanceHistogram,
    MalformedTrialError,
    PermutationTrialSet,
    convergence_sweep,
    distance_histogram,
    entropy_score,
    ingest_trials,
    uniform_shuffle_oracle,
)

from oracles import entropy_of, uniform_distance_q


class TestTrialSet:
    def test_rejects_small_decks(self):
        with pytest.raises(ValueError):
            PermutationTrialSet(2, [[0, 1]])

    def test_rejects_non_permutation_with_index(self):
        with pytest.raises(MalformedTrialError, match="trial 1"):
            PermutationTrialSet(3, [[0, 1, 2], [0, 0, 2]])

    def test_rejects_wrong_length(self):
        with pytest.raises(MalformedTrialError):
            PermutationTrialSet(3, [[0, 1, 2, 2]])


class TestDistanceHistogram:
    def test_identity_ordering(self):
        hist = distance_histogram(PermutationTrialSet(3, [[0, 1, 2]]))
        assert hist.pair_counts(0, 1)[1] == 1
        assert hist.pair_counts(1, 2)[1] == 1
        assert hist.pair_counts(0, 2)[2] == 1

    def test_distance_preserved_under_reversal(self):
        hist = distance_histogram(PermutationTrialSet(3, [[0, 1, 2], [2, 1, 0]]))
        assert hist.pair_counts(0, 2)[2] == 2

    def test_mass_equals_trial_count(self):
        trials = uniform_shuffle_oracle(6, 500, seed=3)
        hist = distance_histogram(trials)
        for i in range(6):
            for j in range(i + 1, 6):
                assert hist.pair_counts(i, j).sum() == 500

    def test_uniform_oracle_matches_closed_form(self):
        # K[i][j][d] / trials ~ 2(N-d)/(N(N-1)) within 3 sigma binomial.
        n, trials = 10, 10_000
        hist = distance_histogram(uniform_shuffle_oracle(n, trials, seed=12))
        q = uniform_distance_q(n)
        for i in range(n):
            for j in range(i + 1, n):
                counts = hist.pair_counts(i, j)[1:n]
                for d0 in range(n - 1):
                    expected = trials * q[d0]
                    sigma = math.sqrt(trials * q[d0] * (1 - q[d0]))
                    assert abs(counts[d0] - expected) <= 4.0 * sigma


class TestEntropyScore:
    def test_degenerate_shuffle_scores_zero(self):
        trials = PermutationTrialSet(5, [[0, 1, 2, 3, 4]] * 20)
        score = entropy_score(distance_histogram(trials))
        assert score.h == 0.0

    def test_closed_form_distribution_value(self):
        # Histogram holding exactly the uniform-permutation distribution.
        n = 10
        counts = np.zeros((n, n, n), dtype=np.int64)
        for i in range(n):
            for j in range(i + 1, n):
                for d in range(1, n):
                    counts[i, j, d] = 2 * (n - d)
        hist = DistanceHistogram(n=n, counts=counts, num_trials=n * (n - 1))
        score = entropy_score(hist)
        expected = entropy_of(uniform_distance_q(n), base=n - 1)
        assert score.h == pytest.approx(expected, abs=1e-12)
        assert score.h == pytest.approx(0.9330, abs=5e-4)

    def test_requires_three_cards(self):
        counts = np.zeros((2, 2, 2), dtype=np.int64)
        counts[0, 1, 1] = 5
        with pytest.raises(ValueError):
            entropy_score(DistanceHistogram(n=2, counts=counts, num_trials=5))

    def test_bounds(self):
        for seed in range(5):
            trials = uniform_shuffle_oracle(5, 50, seed=seed)
            score = entropy_score(distance_histogram(trials))
            assert 0.0 <= score.h <= 1.0

    def test_relabeling_invariance(self):
        rng = random.Random(8)
        base = uniform_shuffle_oracle(7, 300, seed=21)
        relabel = list(range(7))
        rng.shuffle(relabel)
        mapped = np.vectorize(lambda c: relabel[c])(base.trials)
        relabeled = PermutationTrialSet(7, mapped)
        h0 = entropy_score(distance_histogram(base)).h
        h1 = entropy_score(distance_histogram(relabeled)).h
        assert h1 == pytest.approx(h0, abs=1e-12)

    def test_position_reversal_invariance(self):
        base = uniform_shuffle_oracle(7, 300, seed=22)
        reversed_trials = PermutationTrialSet(7, base.trials[:, ::-1].copy())
        assert np.array_equal(
            distance_histogram(base).counts, distance_histogram(reversed_trials).counts
        )


class TestOracle:
    def test_deterministic(self):
        a = uniform_shuffle_oracle(5, 100, seed=7)
        b = uniform_shuffle_oracle(5, 100, seed=7)
        assert np.array_equal(a.trials, b.trials)
        c = uniform_shuffle_oracle(5, 100, seed=8)
        assert not np.array_equal(a.trials, c.trials)

    def test_validates_arguments(self):
        with pytest.raises(ValueError):
            uniform_shuffle_oracle(2, 10, seed=0)
        with pytest.raises(ValueError):
            uniform_shuffle_oracle(5, 0, seed=0)

    def test_three_card_uniformity(self):
        # Each of the 6 orderings of 3 cards should appear ~1000 times in
        # 6000 trials (multinomial 3 sigma ~ 87).
        trials = uniform_shuffle_oracle(3, 6000, seed=5)
        counts = {}
        for row in trials.trials.tolist():
            counts[tuple(row)] = counts.get(tuple(row), 0) + 1
        assert len(counts) == 6
        sigma = math.sqrt(6000 * (1 / 6) * (5 / 6))
        for count in counts.values():
            assert abs(count - 1000) <= 3.0 * sigma


class TestConvergenceSweep:
    def test_requires_ascending_rounds(self):
        with pytest.raises(ValueError):
            convergence_sweep(5, [256, 128], lambda r: uniform_shuffle_oracle(5, r, 0))

    def test_constant_provider_scores_zero_everywhere(self):
        identity = [list(range(5))]
        series = convergence_sweep(
            5, [4, 8], lambda r: PermutationTrialSet(5, identity * r)
        )
        assert [h for _, h in series] == [0.0, 0.0]

    def test_file_provider_equals_oracle(self, tmp_path):
        # Writing oracle trials to disk and sweeping the ingested set must
        # reproduce the oracle series exactly.
        rounds = [16, 32]
        trials = uniform_shuffle_oracle(5, 32, seed=9)
        path = tmp_path / "trials.json"
        path.write_text(json.dumps(trials.trials.tolist()))
        ingested, diagnostics = ingest_trials(path, 5)
        assert diagnostics.dropped == 0
        oracle_series = convergence_sweep(
            5, rounds, lambda r: PermutationTrialSet(5, trials.trials[:r])
        )
        file_series = convergence_sweep(
            5, rounds, lambda r: PermutationTrialSet(5, ingested.trials[:r])
        )
        assert oracle_series == file_series


class TestIngest:
    def test_json_round_trip(self, tmp_path):
        trials = uniform_shuffle_oracle(4, 50, seed=1)
        path = tmp_path / "trials.json"
        path.write_text(json.dumps(trials.trials.tolist()))
        loaded, diagnostics = ingest_trials(path, 4)
        assert np.array_equal(loaded.trials, trials.trials)
        assert diagnostics.as_dict() == {
            "dropped": 0, "shortfall": 0, "expected": None, "received": 50,
        }

    def test_csv_rows(self, tmp_path):
        path = tmp_path / "trials.csv"
        path.write_text("0,1,2\n2,0,1\n")
        loaded, _ = ingest_trials(path, 3)
        assert loaded.trials.tolist() == [[0, 1, 2], [2, 0, 1]]

    def test_duplicate_card_row_dropped(self, tmp_path):
        path = tmp_path / "trials.csv"
        path.write_text("0,1,2\n0,0,2\n1,2,0\n")
        loaded, diagnostics = ingest_trials(path, 3)
        assert len(loaded) == 2
        assert diagnostics.dropped == 1

    def test_shortfall_reported(self, tmp_path):
        rows = uniform_shuffle_oracle(4, 50, seed=2).trials.tolist()
        path = tmp_path / "partial.json"
        path.write_text(json.dumps(rows))
        loaded, diagnostics = ingest_trials(path, 4, expected=1000)
        assert len(loaded) == 50
        assert diagnostics.shortfall == 950
        assert diagnostics.expected == 1000

    def test_zero_valid_trials_errors(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("0,0,0\n9,9,9\n")
        with pytest.raises(ValueError, match="no valid trials"):
            ingest_trials(path, 3)

    def test_unreadable_file_errors(self, tmp_path):
        with pytest.raises(OSError):
            ingest_trials(tmp_path / "missing.csv", 3)
