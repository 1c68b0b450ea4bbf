"""Published reference outputs for well-known irrational-number bit streams.

NIST SP 800-22 Appendix B tabulates test outputs for the first million bits
of the binary expansion of e.  Reproducing them end to end exercises the
whole pipeline at once: bit handling, every statistic, and the special
functions.  The expansion is generated exactly with mpmath.

Rank and linear complexity are asserted at 2e-3: this implementation
freezes the standard's printed (rounded) category probabilities, while the
published outputs were produced from the exact products, which moves those
two p-values in the fourth decimal place.
"""

import math

import numpy as np
import pytest

mpmath = pytest.importorskip("mpmath")

from entropybench.battery import (
    binary_rank,
    block_frequency,
    linear_complexity,
    longest_run_of_ones,
    monobit,
    runs,
    serial,
    spectral,
)
from entropybench.bitstream import BitSequence

# First 100 bits of pi's binary expansion (integer part included), the
# worked-example input used throughout SP 800-22 section 2.
PI_100 = (
    "1100100100001111110110101010001000100001011010001100001000110100"
    "110001001100011001100010100010111000"
)


@pytest.fixture(scope="module")
def e_million_bits():
    # e = 10.10110111...b, so floor(e * 2^999998) is a million-bit integer
    # whose binary digits are the expansion's first million bits.
    mpmath.mp.prec = 1_000_100
    scaled = int(mpmath.floor(mpmath.ldexp(mpmath.exp(1), 999_998)))
    digits = bin(scaled)[2:]
    assert len(digits) == 1_000_000
    return BitSequence(np.frombuffer(digits.encode(), dtype=np.uint8) - ord("0"))


class TestPiHundredBits:
    def test_monobit(self):
        result = monobit(BitSequence(PI_100))
        assert result.p_values[0] == pytest.approx(0.109599, abs=1e-6)

    def test_runs(self):
        result = runs(BitSequence(PI_100))
        assert result.statistic == 52.0
        assert result.p_values[0] == pytest.approx(0.500798, abs=1e-6)


class TestEMillionBits:
    def test_monobit(self, e_million_bits):
        assert monobit(e_million_bits).p_values[0] == pytest.approx(0.953749, abs=1e-5)

    def test_block_frequency(self, e_million_bits):
        result = block_frequency(e_million_bits, 128)
        assert result.p_values[0] == pytest.approx(0.211072, abs=1e-5)

    def test_runs(self, e_million_bits):
        assert runs(e_million_bits).p_values[0] == pytest.approx(0.561917, abs=1e-5)

    def test_longest_run_of_ones(self, e_million_bits):
        result = longest_run_of_ones(e_million_bits)
        assert result.p_values[0] == pytest.approx(0.718945, abs=1e-5)

    def test_spectral(self, e_million_bits):
        assert spectral(e_million_bits).p_values[0] == pytest.approx(0.847187, abs=1e-5)

    def test_serial_m16(self, e_million_bits):
        result = serial(e_million_bits, 16)
        assert result.p_values[0] == pytest.approx(0.766182, abs=1e-5)
        assert result.p_values[1] == pytest.approx(0.462921, abs=1e-5)

    def test_binary_rank(self, e_million_bits):
        # rounded category probabilities; see module docstring
        result = binary_rank(e_million_bits)
        assert result.p_values[0] == pytest.approx(0.306156, abs=2e-3)

    def test_linear_complexity(self, e_million_bits):
        result = linear_complexity(e_million_bits, 500)
        assert result.p_values[0] == pytest.approx(0.826335, abs=2e-3)
