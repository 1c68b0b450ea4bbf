import math

import numpy as np
import pytest

from entropybench.numerics import dft_moduli, erfc, igamc

from oracles import erfc_asymptotic, naive_dft_moduli


class TestErfc:
    def test_symmetry_point(self):
        assert erfc(0.0) == 1.0

    def test_cross_check_against_igamc_identity(self):
        # erfc(x) = Q(1/2, x^2) for x >= 0; the two sides are computed by
        # unrelated code paths.
        for x in np.linspace(0.01, 9.0, 117):
            assert erfc(x) == pytest.approx(igamc(0.5, x * x), rel=1e-10)

    def test_monobit_scale_value(self):
        assert erfc(0.4472135955) == pytest.approx(0.527089, abs=1e-6)

    def test_deep_tail_against_asymptotic_expansion(self):
        x = 7.0710678
        assert erfc(x) == pytest.approx(erfc_asymptotic(x), rel=1e-9)

    def test_reflection(self):
        for x in np.linspace(-8, 8, 161):
            assert erfc(x) + erfc(-x) == pytest.approx(2.0, abs=1e-14)

    def test_monotone_decreasing_and_bounded(self):
        # Strict bounds only hold where float64 can resolve them; beyond
        # |x| ~ 6 the value saturates at 2.0 (or denormals near 0).
        xs = np.linspace(-5.5, 5.5, 221)
        values = [erfc(x) for x in xs]
        assert all(a > b for a, b in zip(values, values[1:]))
        assert all(0.0 < v < 2.0 for v in values)
        wide = [erfc(x) for x in np.linspace(-10, 10, 401)]
        assert all(a >= b for a, b in zip(wide, wide[1:]))
        assert all(0.0 < v <= 2.0 for v in wide)


class TestIgamc:
    @pytest.mark.parametrize("a,x", [(0.0, 1.0), (-1.0, 1.0), (1.0, -0.5)])
    def test_domain_errors(self, a, x):
        with pytest.raises(ValueError):
            igamc(a, x)

    def test_at_zero(self):
        assert igamc(3.7, 0.0) == 1.0

    def test_closed_form_a1(self):
        # Q(1, x) = exp(-x)
        assert igamc(1.0, 0.4) == pytest.approx(math.exp(-0.4), rel=1e-12)

    def test_closed_form_a2(self):
        # Q(2, x) = exp(-x)(1 + x)
        assert igamc(2.0, 0.8) == pytest.approx(math.exp(-0.8) * 1.8, rel=1e-12)

    def test_closed_form_a_three_halves(self):
        # Q(3/2, x) = erfc(sqrt(x)) + 2 sqrt(x/pi) exp(-x)
        expected = math.erfc(math.sqrt(0.5)) + 2 * math.sqrt(0.5 / math.pi) * math.exp(-0.5)
        assert igamc(1.5, 0.5) == pytest.approx(expected, rel=1e-12)
        assert igamc(1.5, 0.5) == pytest.approx(0.801252, abs=1e-6)

    @pytest.mark.parametrize("a", [0.5, 1.0, 3.0, 7.5, 128.0, 1000.0])
    def test_monotone_decreasing_in_x(self, a):
        xs = np.linspace(0.0, 4.0 * a + 10.0, 300)
        values = [igamc(a, x) for x in xs]
        assert all(u >= v for u, v in zip(values, values[1:]))
        assert all(0.0 <= v <= 1.0 for v in values)

    def test_closed_form_chain_large_a(self):
        # Recurrence Q(a+1, x) = Q(a, x) + x^a e^-x / Gamma(a+1) walked up
        # from Q(1, x) gives an independent value for integer a.
        x = 37.0
        expected = math.exp(-x)
        for a in range(1, 60):
            assert igamc(float(a), x) == pytest.approx(expected, rel=1e-9)
            expected += math.exp(a * math.log(x) - x - math.lgamma(a + 1))


class TestDftModuli:
    def test_too_short(self):
        with pytest.raises(ValueError):
            dft_moduli([1.0])

    def test_constant_signal(self):
        assert dft_moduli([1, 1, 1, 1]) == pytest.approx([4.0, 0.0], abs=1e-12)

    def test_nyquist_energy_invisible(self):
        assert dft_moduli([1, -1, 1, -1]) == pytest.approx([0.0, 0.0], abs=1e-12)

    def test_matches_naive_dft_all_lengths(self):
        rng = np.random.default_rng(7)
        for n in range(2, 257):
            signal = rng.choice([-1.0, 1.0], size=n)
            fast = dft_moduli(signal)
            ref = naive_dft_moduli(signal)
            assert fast.shape == (n // 2,)
            scale = max(1.0, float(ref.max()))
            assert np.max(np.abs(fast - ref)) / scale < 1e-6

    def test_matches_naive_dft_length_1000(self):
        rng = np.random.default_rng(11)
        signal = rng.choice([-1.0, 1.0], size=1000)
        fast = dft_moduli(signal)
        ref = naive_dft_moduli(signal)
        assert np.max(np.abs(fast - ref)) / float(ref.max()) < 1e-6
