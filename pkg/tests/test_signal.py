import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st_
from numpy.testing import assert_allclose

from sparsetf import (Decomposition, DictionaryParams, InvalidInputError, PhasePair,
                      SampledSignal, cumulative_integral, differentiate,
                      gen_crossing_example, gen_mode_mixing_example, inner_product,
                      reconstruct)

from conftest import tone, tone_pair


class TestDifferentiate:
    def test_linear_ramp_is_exact(self):
        t = np.linspace(0.0, 2.0, 513)
        assert_allclose(differentiate(t, t[1] - t[0]), np.ones(513), rtol=0, atol=1e-12)

    def test_sine_matches_analytic_derivative(self):
        n = 1025  # dt = 1/1024
        t = np.linspace(0.0, 1.0, n)
        dt = t[1] - t[0]
        got = differentiate(np.sin(2 * np.pi * t), dt)
        assert np.max(np.abs(got - 2 * np.pi * np.cos(2 * np.pi * t))) < 1e-3

    def test_too_short_raises(self):
        with pytest.raises(InvalidInputError):
            differentiate(np.array([0.0, 1.0]), 0.5)

    def test_bad_dt_raises(self):
        with pytest.raises(InvalidInputError):
            differentiate(np.arange(5.0), 0.0)

    def test_derivative_of_cumulative_integral_is_identity(self):
        # second-order accuracy: error drops ~4x when the step halves
        errs = []
        for n in (513, 1025):
            t = np.linspace(0.0, 1.0, n)
            dt = t[1] - t[0]
            x = np.exp(np.sin(2 * np.pi * t))
            back = differentiate(cumulative_integral(x, dt), dt)
            errs.append(np.max(np.abs(back - x)))
        assert errs[0] < 1e-3
        assert errs[1] < 0.4 * errs[0]


class TestInnerProduct:
    def test_cos_squared_over_whole_periods(self):
        s = tone(8.0, n=4096)
        assert inner_product(s, s) == pytest.approx(0.5, abs=1e-6)

    def test_orthogonal_tones(self):
        assert inner_product(tone(8.0, 4096), tone(16.0, 4096)) == pytest.approx(0.0, abs=1e-6)

    def test_grid_mismatch_raises(self):
        with pytest.raises(InvalidInputError):
            inner_product(tone(8.0, 4096), tone(8.0, 2048))

    @settings(deadline=None, max_examples=25)
    @given(a=st_.floats(-5, 5), b=st_.floats(-5, 5), c=st_.floats(-5, 5), d=st_.floats(-5, 5))
    def test_exact_on_linear_polynomials(self, a, b, c, d):
        # trapezoid integrates products of degree-1 polynomials with a
        # quadratic error term that vanishes faster than 1e-12 relative here
        n = 257
        t = np.linspace(0.0, 1.0, n)
        x = SampledSignal(0.0, 1.0, a + b * t)
        y = SampledSignal(0.0, 1.0, c + d * t)
        exact = a * c + (a * d + b * c) / 2.0 + b * d / 3.0
        got = inner_product(x, y)
        err_scale = (abs(b * d) + 1e-30) / (n - 1) ** 2  # trapezoid curvature term
        assert abs(got - exact) <= err_scale + 1e-12 * max(abs(exact), 1.0)

    def test_mode_mixing_overlap_matches_finer_grid(self):
        _, gt_c, _ = gen_mode_mixing_example(2**15)
        _, gt_f, _ = gen_mode_mixing_example(10 * 2**15)
        coarse = inner_product(gt_c.pairs[0].mode(), gt_c.pairs[1].mode())
        fine = inner_product(gt_f.pairs[0].mode(), gt_f.pairs[1].mode())
        assert abs(coarse - fine) <= 1e-4 * abs(fine)


class TestReconstruct:
    def test_single_pair_identity(self):
        p = tone_pair(10.0, n=1024)
        got = reconstruct([p])
        t = np.linspace(0, 1, 1024)
        assert_allclose(got.values, np.cos(2 * np.pi * 10 * t), rtol=0, atol=1e-14)

    def test_linearity_on_mode_mixing_pairs(self):
        _, gt, _ = gen_mode_mixing_example(4096)
        both = reconstruct(list(gt.pairs))
        separate = reconstruct([gt.pairs[0]]).values + reconstruct([gt.pairs[1]]).values
        assert_allclose(both.values, separate, rtol=0, atol=1e-12)

    @settings(deadline=None, max_examples=20)
    @given(f1=st_.integers(3, 40), f2=st_.integers(3, 40), amp=st_.floats(0.1, 3.0))
    def test_linearity_random(self, f1, f2, amp):
        a = tone_pair(float(f1), n=512, amp=amp)
        b = tone_pair(float(f2), n=512, amp=1.0, phase0=0.3)
        assert_allclose(reconstruct([a, b]).values,
                        reconstruct([a]).values + reconstruct([b]).values,
                        rtol=0, atol=1e-12)

    def test_swapped_split_reconstructs_identically(self):
        _, gt_a, gt_b = gen_crossing_example(32, 4096)
        ra = reconstruct(list(gt_a.pairs))
        rb = reconstruct(list(gt_b.pairs))
        assert np.max(np.abs(ra.values - rb.values)) < 1e-10

    def test_empty_raises(self):
        with pytest.raises(InvalidInputError):
            reconstruct([])

    def test_grid_mismatch_raises(self):
        with pytest.raises(InvalidInputError):
            reconstruct([tone_pair(5.0, 512), tone_pair(5.0, 256)])


class TestTypes:
    def test_signal_validation(self):
        with pytest.raises(InvalidInputError):
            SampledSignal(1.0, 0.0, np.zeros(8))
        with pytest.raises(InvalidInputError):
            SampledSignal(0.0, 1.0, np.array([1.0]))
        with pytest.raises(InvalidInputError):
            SampledSignal(0.0, 1.0, np.array([1.0, np.nan]))

    def test_signal_values_read_only(self):
        s = tone(4.0, 64)
        with pytest.raises(ValueError):
            s.values[0] = 7.0

    def test_phase_pair_validation(self):
        n = 64
        t = np.linspace(0, 1, n)
        with pytest.raises(InvalidInputError):
            PhasePair(0.0, 1.0, np.zeros(n), 2 * np.pi * 5 * t)  # a not positive
        with pytest.raises(InvalidInputError):
            PhasePair(0.0, 1.0, np.ones(n), -2 * np.pi * 5 * t)  # theta decreasing

    def test_dictionary_params_validation(self):
        with pytest.raises(InvalidInputError):
            DictionaryParams(epsilon=0.0, d=2.0)
        with pytest.raises(InvalidInputError):
            DictionaryParams(epsilon=0.1, d=1.0)
        with pytest.raises(InvalidInputError):
            DictionaryParams(epsilon=0.1, d=2.0, m_prime=0.5)
        with pytest.raises(InvalidInputError):
            DictionaryParams(epsilon=0.1, d=2.0, epsilon0=0.0)

    def test_decomposition_reconstructs_signal(self):
        p1 = tone_pair(8.0, 1024)
        p2 = tone_pair(24.0, 1024)
        resid = SampledSignal(0.0, 1.0, 1e-3 * np.ones(1024))
        d = Decomposition((p1, p2), resid)
        expected = reconstruct([p1, p2]).values + resid.values
        assert_allclose(d.signal().values, expected, rtol=0, atol=1e-14)
