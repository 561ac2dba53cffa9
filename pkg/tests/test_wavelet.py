import numpy as np
import pytest
from numpy.testing import assert_allclose

from sparsetf import (InvalidInputError, SampledSignal, bspline5,
                      concentration_error, cwt, cwt_direct, default_scales,
                      evaluate_time_domain, gen_random_well_separated, make_wavelet,
                      moments)

from conftest import tone


def bspline_recurrence(x: float, order: int = 5) -> float:
    """Cox-de Boor recurrence on integer knots 0..order; independent oracle."""

    def b(xv, k, i):
        if k == 1:
            return 1.0 if i <= xv < i + 1 else 0.0
        return ((xv - i) / (k - 1)) * b(xv, k - 1, i) + ((i + k - xv) / (k - 1)) * b(xv, k - 1, i + 1)

    return b(x, order, 0)


class TestFrequencyResponse:
    def test_support_endpoints_and_peak(self):
        w = make_wavelet(0.2)
        assert w.freq_response(1.0) == pytest.approx(1.0, abs=1e-14)
        assert abs(w.freq_response(0.8)) < 1e-30
        assert abs(w.freq_response(1.2)) < 1e-30
        assert w.freq_response(0.79) == 0.0 and w.freq_response(1.21) == 0.0

    def test_symmetry(self):
        w = make_wavelet(0.2)
        assert w.freq_response(0.9) == pytest.approx(w.freq_response(1.1), rel=1e-13)

    def test_against_recurrence_oracle(self):
        w = make_wavelet(0.2)
        for xi in (0.9, 1.1):
            expected = bspline_recurrence(2.5 + (xi - 1.0) * 12.5) / bspline_recurrence(2.5)
            assert w.freq_response(xi) == pytest.approx(expected, rel=1e-12)
        # the underlying piecewise polynomial itself
        for x in (0.3, 1.7, 2.5, 3.2, 4.9):
            assert bspline5(x) == pytest.approx(bspline_recurrence(x), rel=1e-12)

    def test_peak_is_global_max(self):
        w = make_wavelet(0.35)
        xi = np.linspace(0.5, 1.5, 5001)
        vals = w.freq_response(xi)
        assert np.max(vals) == pytest.approx(1.0, abs=1e-10)
        assert np.all(vals <= 1.0 + 1e-12)

    @pytest.mark.parametrize("delta", [0.0, 1.0, -0.2, 1.5])
    def test_invalid_delta_raises(self, delta):
        with pytest.raises(InvalidInputError):
            make_wavelet(delta)


class TestTimeDomain:
    def test_value_at_zero_matches_quadrature_of_response(self):
        for delta in (0.4, 0.2, 0.1):
            w = make_wavelet(delta)
            xi = np.linspace(1 - delta, 1 + delta, 200001)
            quad = np.trapezoid(w.freq_response(xi), xi) / (2 * np.pi)
            got = evaluate_time_domain(w, np.array([0.0]))[0]
            assert got.imag == pytest.approx(0.0, abs=1e-15)
            assert got.real == pytest.approx(quad, abs=1e-8)

    def test_magnitude_is_even(self):
        w = make_wavelet(0.2)
        tau = np.linspace(0.1, 300.0, 777)
        assert_allclose(np.abs(w.time_domain(tau)), np.abs(w.time_domain(-tau)),
                        rtol=1e-13, atol=0)

    def test_fft_of_samples_reproduces_response(self):
        w = make_wavelet(0.2)
        T = w.tail_cutoff() * 1.2
        n = 2**20
        dt = 2 * T / n
        tau = (np.arange(n) - n // 2) * dt
        samples = w.time_domain(tau)
        freqs = np.fft.fftfreq(n, d=dt) * 2 * np.pi
        spectrum = np.fft.fft(np.fft.ifftshift(samples)) * dt
        sel = (freqs > 1 - 0.2) & (freqs < 1 + 0.2)
        assert np.max(np.abs(spectrum[sel] - w.freq_response(freqs[sel]))) < 1e-4

    def test_non_finite_input_raises(self):
        with pytest.raises(InvalidInputError):
            make_wavelet(0.2).time_domain(np.array([np.inf]))


class TestMoments:
    def test_finite_and_positive(self):
        m = moments(make_wavelet(0.2))
        assert m.i1 > 0 and m.i2 > 0 and m.i3 > 0
        assert np.isfinite([m.i1, m.i2, m.i3]).all()

    def test_first_moment_halving_ratio(self):
        # stated scaling order -1: halving delta should double i1
        for delta in (0.4, 0.2, 0.1):
            ratio = moments(make_wavelet(delta / 2)).i1 / moments(make_wavelet(delta)).i1
            assert ratio == pytest.approx(2.0, rel=0.25)

    def test_third_moment_halving_ratio(self):
        # stated scaling order -3: halving delta should multiply i3 by 8
        for delta in (0.4, 0.2, 0.1):
            ratio = moments(make_wavelet(delta / 2)).i3 / moments(make_wavelet(delta)).i3
            assert ratio == pytest.approx(8.0, rel=0.35)


class TestTransform:
    def test_pure_tone_ridge_location(self):
        f = tone(64.0, 4096)
        w = make_wavelet(0.2)
        scales = default_scales(f, w, voices=32, fmin=32.0, fmax=128.0)
        s = cwt(f, w, scales)
        mid = f.n // 2
        j = int(np.argmax(np.abs(s.coeffs[mid])))
        target = 1.0 / (2 * np.pi * 64.0)
        step = s.scales[min(j + 1, s.scales.size - 1)] / s.scales[j]
        assert abs(np.log(s.scales[j] / target)) <= np.log(step) * 1.001

    def test_pure_tone_ridge_magnitude(self):
        f = tone(64.0, 4096)
        w = make_wavelet(0.2)
        target = 1.0 / (2 * np.pi * 64.0)
        scales = np.array([target * 0.9, target, target * 1.1])
        s = cwt(f, w, scales)
        mid = f.n // 2
        assert abs(s.coeffs[mid, 1]) == pytest.approx(np.sqrt(target) / 2, rel=5e-2)

    def test_zero_signal_transforms_to_zero(self):
        f = SampledSignal(0.0, 1.0, np.zeros(512))
        s = cwt(f, make_wavelet(0.2), np.array([0.001, 0.002]))
        assert np.all(s.coeffs == 0)

    def test_linearity(self):
        n = 1024
        f1 = tone(32.0, n)
        f2 = tone(80.0, n, amp=0.7)
        w = make_wavelet(0.2)
        scales = default_scales(SampledSignal(0, 1, f1.values + f2.values), w, voices=8)
        both = cwt(SampledSignal(0, 1, f1.values + f2.values), w, scales)
        sep = cwt(f1, w, scales).coeffs + cwt(f2, w, scales).coeffs
        assert_allclose(both.coeffs, sep, rtol=0, atol=1e-12)

    @pytest.mark.parametrize("extension", ["periodic", "mirror"])
    def test_fft_path_matches_direct_quadrature(self, extension):
        n = 1024
        t = np.linspace(0, 1, n)
        f = SampledSignal(0, 1, np.cos(2 * np.pi * 40 * t) + 0.5 * np.cos(2 * np.pi * 13 * t + 0.4))
        w = make_wavelet(0.25)
        scales = default_scales(f, w, voices=6)
        fast = cwt(f, w, scales, extension=extension)
        slow = cwt_direct(f, w, scales, extension=extension)
        rel = np.max(np.abs(fast.coeffs - slow.coeffs)) / np.max(np.abs(slow.coeffs))
        assert rel < 1e-8

    def test_nonpositive_scale_raises(self):
        f = tone(10.0, 256)
        with pytest.raises(InvalidInputError):
            cwt(f, make_wavelet(0.2), np.array([-0.1, 0.2]))
        with pytest.raises(InvalidInputError):
            cwt(f, make_wavelet(0.2), np.array([0.2, 0.1]))

    def test_unresolved_scale_warns(self):
        f = tone(10.0, 256)
        tiny = 0.25 * f.dt  # far below the sampling limit
        with pytest.warns(RuntimeWarning):
            s = cwt(f, make_wavelet(0.2), np.array([tiny, 0.01]))
        assert tiny in s.unresolved_scales

    def test_default_scales_span_requested_band(self):
        f = tone(64.0, 2048)
        scales = default_scales(f, make_wavelet(0.2), voices=16, fmin=20.0, fmax=100.0)
        assert scales[0] == pytest.approx(1 / (2 * np.pi * 100.0))
        assert scales[-1] == pytest.approx(1 / (2 * np.pi * 20.0))
        steps = np.diff(np.log2(scales))
        assert np.all(steps <= 1 / 16 + 1e-12)

    def test_default_scales_reject_empty_spectrum(self):
        f = SampledSignal(0.0, 1.0, np.zeros(256))
        with pytest.raises(InvalidInputError):
            default_scales(f, make_wavelet(0.2))

    def test_threaded_evaluation_is_deterministic(self, monkeypatch):
        f = tone(48.0, 1024)
        w = make_wavelet(0.2)
        scales = default_scales(f, w, voices=8)
        seq = cwt(f, w, scales, threads=1)
        par = cwt(f, w, scales, threads=4)
        np.testing.assert_array_equal(seq.coeffs, par.coeffs)
        monkeypatch.setenv("SPARSETF_THREADS", "3")
        env = cwt(f, w, scales)
        np.testing.assert_array_equal(seq.coeffs, env.coeffs)


class TestConcentration:
    def test_pure_tone_error_is_discretization_level(self):
        n = 4096
        t = np.linspace(0, 1, n)
        from sparsetf import PhasePair

        pair = PhasePair(0, 1, np.ones(n), 2 * np.pi * 64 * t)
        w = make_wavelet(0.2)
        omega = 1.0 / (2 * np.pi * 64.0)
        err, bound = concentration_error(pair, w, 0.5, omega)
        assert err <= 1e-3

    def test_modulated_tone_error_within_bound(self):
        n = 4096
        t = np.linspace(0, 1, n)
        from sparsetf import PhasePair

        a = 1 + 0.05 * np.sin(2 * np.pi * t)
        theta = 2 * np.pi * 64 * t + 0.5 * np.sin(2 * np.pi * t)
        pair = PhasePair(0, 1, a, theta)
        w = make_wavelet(0.2)
        theta_p_mid = pair.theta_prime()[n // 2]
        err, bound = concentration_error(pair, w, 0.5, 1.0 / theta_p_mid)
        assert 0 < err <= bound

    def test_error_is_stable_under_grid_refinement(self):
        # analytic deviation, not quadrature noise: once the grid resolves the
        # carrier well the measured error stops moving
        from sparsetf import PhasePair

        errs = []
        for n in (16384, 4 * 16384):
            t = np.linspace(0, 1, n)
            a = 1 + 0.05 * np.sin(2 * np.pi * t)
            theta = 2 * np.pi * 64 * t + 0.5 * np.sin(2 * np.pi * t)
            pair = PhasePair(0, 1, a, theta)
            theta_p_mid = pair.theta_prime()[n // 2]
            err, _ = concentration_error(pair, make_wavelet(0.2), 0.5, 1.0 / theta_p_mid)
            errs.append(err)
        assert abs(errs[1] - errs[0]) < 0.10 * errs[0]

    def test_out_of_band_magnitude_within_bound(self):
        # single admissible mode: away from its scale band the normalized
        # transform magnitude stays below the concentration bound
        f, gt = gen_random_well_separated(1, 2.0, 0.05, 11, 4096)
        pair = gt.pairs[0]
        w = make_wavelet(0.2)
        theta_p = pair.theta_prime()
        band_lo = (1 - w.delta) / np.max(theta_p)
        for omega in (band_lo / 2.0, band_lo / 3.5):
            err, bound = concentration_error(pair, w, 0.45, omega)
            assert err <= bound
