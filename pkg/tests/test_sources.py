import math

import numpy as np
import pytest

from entropybench.sources import (
    SampleSource,
    UnsupportedSourceError,
    draw_integers,
    extract_integers,
    ingest_transcript,
    write_integers,
)


class TestSampleSource:
    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            SampleSource(kind="quantum", label="x")

    def test_label_required(self):
        with pytest.raises(ValueError):
            SampleSource(kind="os_entropy", label="")

    def test_synthetic_flag(self):
        biased = SampleSource(kind="biased", label="b", params={"profile": "constant"})
        real = SampleSource(kind="os_entropy", label="os")
        assert biased.synthetic and not real.synthetic


class TestDrawIntegers:
    def test_argument_validation(self):
        source = SampleSource(kind="os_entropy", label="os")
        with pytest.raises(ValueError):
            draw_integers(source, 0, 255)
        with pytest.raises(ValueError):
            draw_integers(source, 10, 0)

    def test_os_entropy_range_and_spread(self):
        source = SampleSource(kind="os_entropy", label="os")
        sample = draw_integers(source, 20_000, 255)
        assert len(sample) == 20_000
        assert 0 <= int(sample.values.min()) and int(sample.values.max()) <= 255
        # loose mean bound: 5 sigma of a uniform 0..255 mean estimate
        sigma = 256 / math.sqrt(12) / math.sqrt(20_000)
        assert abs(float(sample.values.mean()) - 127.5) < 5 * sigma

    def test_os_entropy_non_power_of_two_bound(self):
        source = SampleSource(kind="os_entropy", label="os")
        sample = draw_integers(source, 5000, 5)
        values = sample.values
        assert int(values.max()) <= 5
        # rejection sampling keeps residues balanced; crude 5-sigma check
        counts = np.bincount(values, minlength=6)
        expected = 5000 / 6
        sigma = math.sqrt(5000 * (1 / 6) * (5 / 6))
        assert all(abs(c - expected) < 5 * sigma for c in counts)

    def test_crypto_below_range(self):
        source = SampleSource(kind="crypto_below", label="cb")
        sample = draw_integers(source, 2000, 10)
        assert 0 <= int(sample.values.min()) and int(sample.values.max()) <= 10

    def test_crypto_below_unbiased_at_scale(self):
        # 1e6 draws in [0, 255]: mean within 3 sigma of 127.5 and per-value
        # frequencies within 4 sigma of uniform (one cell of 256 allowed
        # past the line as a multiple-comparisons margin).
        source = SampleSource(kind="crypto_below", label="cb")
        sample = draw_integers(source, 1_000_000, 255)
        mean_sigma = (256 / math.sqrt(12)) / math.sqrt(1_000_000)
        assert abs(float(sample.values.mean()) - 127.5) < 3 * mean_sigma
        counts = np.bincount(sample.values, minlength=256)
        expected = 1_000_000 / 256
        cell_sigma = math.sqrt(1_000_000 * (1 / 256) * (255 / 256))
        outside = int((np.abs(counts - expected) > 4 * cell_sigma).sum())
        assert outside <= 1, outside

    def test_seeded_reproducible(self):
        source = SampleSource(kind="seeded_deterministic", label="s", params={"seed": 42})
        a = draw_integers(source, 500, 255)
        b = draw_integers(source, 500, 255)
        assert np.array_equal(a.values, b.values)
        other = SampleSource(kind="seeded_deterministic", label="s2", params={"seed": 43})
        assert not np.array_equal(a.values, draw_integers(other, 500, 255).values)

    def test_biased_constant(self):
        source = SampleSource(kind="biased", label="c7",
                              params={"profile": "constant", "value": 7})
        sample = draw_integers(source, 100, 255)
        assert sample.values.tolist() == [7] * 100

    def test_biased_top_heavy(self):
        source = SampleSource(kind="biased", label="th",
                              params={"profile": "top_heavy", "value": 234,
                                      "mass": 0.8, "seed": 3})
        sample = draw_integers(source, 5000, 255)
        favorite = int((sample.values == 234).sum())
        assert favorite > 0.7 * 5000  # 0.8 mass plus uniform leakage

    def test_biased_truncated(self):
        source = SampleSource(kind="biased", label="tr",
                              params={"profile": "truncated", "low": 10, "high": 50})
        sample = draw_integers(source, 1000, 255)
        assert int(sample.values.min()) >= 10
        assert int(sample.values.max()) <= 50

    def test_biased_bad_profile(self):
        source = SampleSource(kind="biased", label="b", params={"profile": "wavy"})
        with pytest.raises(ValueError):
            draw_integers(source, 10, 255)

    @pytest.mark.parametrize("kind", ["file_transcript", "llm_live"])
    def test_non_generating_kinds(self, kind):
        source = SampleSource(kind=kind, label="x")
        with pytest.raises(UnsupportedSourceError):
            draw_integers(source, 10, 255)


class TestExtractIntegers:
    def test_prose_stripping(self):
        values, dropped = extract_integers("Here are your numbers: 12, 7, and 255.", 255)
        assert values == [12, 7, 255]
        assert dropped == 0

    def test_json_array_text(self):
        values, _ = extract_integers("[3,1,4,1,5]", 9)
        assert values == [3, 1, 4, 1, 5]

    def test_out_of_range_dropped_with_count(self):
        text = "for i in range(1000):\n    print(i % 256)\n42"
        values, dropped = extract_integers(text, 255)
        assert dropped == 2  # 1000 and the 256 inside the modulo
        assert 42 in values

    def test_strict_mode(self):
        values, dropped = extract_integers("[1, 2, 3]", 255, strict=True)
        assert values == [1, 2, 3] and dropped == 0
        with pytest.raises(ValueError):
            extract_integers("numbers: 1 2 3", 255, strict=True)


class TestIngestTranscript:
    def test_lenient_file(self, tmp_path):
        path = tmp_path / "reply.txt"
        path.write_text("Sure! Here you go:\n```\n12, 7\n255\n```\nEnjoy.")
        sample, diagnostics = ingest_transcript(path, 255)
        assert sample.values.tolist() == [12, 7, 255]
        assert diagnostics == {"extracted": 3, "dropped": 0, "kept": 3}

    def test_oversized_values_dropped(self, tmp_path):
        path = tmp_path / "reply.txt"
        path.write_text("1000 5 7")
        sample, diagnostics = ingest_transcript(path, 255)
        assert sample.values.tolist() == [5, 7]
        assert diagnostics["dropped"] == 1

    def test_zero_values_is_an_error(self, tmp_path):
        path = tmp_path / "reply.txt"
        path.write_text("no numbers here")
        with pytest.raises(ValueError):
            ingest_transcript(path, 255)

    def test_idempotent_round_trip(self, tmp_path):
        first = tmp_path / "reply.txt"
        first.write_text("some prose 3 then 1 then 4 then 1 then 5")
        sample, _ = ingest_transcript(first, 9)
        serialized = tmp_path / "serialized.txt"
        write_integers(serialized, sample)
        again, diagnostics = ingest_transcript(serialized, 9)
        assert np.array_equal(again.values, sample.values)
        assert diagnostics["dropped"] == 0
