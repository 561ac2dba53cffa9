"""Frequency-domain B-spline wavelet, its transform, and concentration checks.

The analysis wavelet is defined in the frequency domain as a scaled cardinal
quartic B-spline bump::

    psi_hat(xi) = B5((xi - 1) * 5/(2*delta) + 5/2) / B5(5/2)

so that psi_hat is supported exactly on ``[1-delta, 1+delta]``, peaks at
``psi_hat(1) = 1`` and is symmetric about ``xi = 1``.  The Fourier convention
is ``psi_hat(xi) = integral psi(z) exp(-i xi z) dz``, which gives the closed
time-domain form

    psi(tau) = K * exp(i tau) * sinc(delta*tau/5)**5,
    K = delta / (5*pi*B5(5/2)),    sinc(x) = sin(x)/x.

A mode with instantaneous frequency theta' produces a transform magnitude
concentrated on the scale band ``omega * theta'(t) in [1-delta, 1+delta]``.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.fft import next_fast_len

from .errors import InvalidInputError, NumericalFailureError
from .signal import PhasePair, SampledSignal

__all__ = [
    "BSplineWavelet",
    "Scalogram",
    "WaveletMoments",
    "bspline5",
    "make_wavelet",
    "evaluate_time_domain",
    "moments",
    "cwt",
    "cwt_direct",
    "concentration_error",
    "default_scales",
]

#: Central value B5(5/2) of the cardinal quartic B-spline (support [0, 5]).
B5_CENTER = 115.0 / 192.0

#: Keep |tau| where the sinc^5 envelope exceeds this fraction of the peak.
TAIL_REL = 1e-8

#: Warn when a scale has fewer oscillation samples than this.
MIN_SAMPLES_PER_CYCLE = 8


def bspline5(x) -> np.ndarray:
    """Cardinal B-spline of order 5 (degree 4), supported on [0, 5].

    Evaluated from the explicit one-sided power form
    ``B5(x) = (1/4!) * sum_k (-1)^k C(5,k) (x-k)_+^4``.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for k in range(6):
        out += ((-1) ** k) * math.comb(5, k) * np.clip(x - k, 0.0, None) ** 4
    return out / 24.0


def _sinc(u):
    return np.sinc(u / np.pi)


def _sinc_d1(u):
    # (cos u - sinc u)/u, series -u/3 + u^3/30 near the removable singularity
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < 1e-3
    safe = np.where(small, 1.0, u)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (np.cos(safe) - _sinc(safe)) / safe
    return np.where(small, -u / 3.0 + u**3 / 30.0, val)


def _sinc_d2(u):
    # -sinc(u) - 2*sinc'(u)/u, series -1/3 + u^2/10 - u^4/168 near 0
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < 1e-3
    safe = np.where(small, 1.0, u)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = -_sinc(safe) - 2.0 * _sinc_d1(safe) / safe
    return np.where(small, -1.0 / 3.0 + u**2 / 10.0 - u**4 / 168.0, val)


@dataclass(frozen=True)
class BSplineWavelet:
    """Analysis wavelet with frequency support ``[1-delta, 1+delta]``."""

    delta: float

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise InvalidInputError(f"delta must lie in (0,1), got {self.delta}")

    @property
    def peak_amplitude(self) -> float:
        """psi(0) = delta / (5*pi*B5(5/2)), the time-domain peak."""
        return self.delta / (5.0 * np.pi * B5_CENTER)

    def freq_response(self, xi) -> np.ndarray:
        """psi_hat(xi), a quartic piecewise polynomial bump on the support."""
        xi = np.asarray(xi, dtype=float)
        return bspline5((xi - 1.0) * (5.0 / (2.0 * self.delta)) + 2.5) / B5_CENTER

    def time_domain(self, tau) -> np.ndarray:
        """psi(tau) in closed form: modulated dilated sinc^5 kernel."""
        tau = np.asarray(tau, dtype=float)
        if not np.all(np.isfinite(tau)):
            raise InvalidInputError("tau must be finite")
        return self.peak_amplitude * np.exp(1j * tau) * _sinc(self.delta * tau / 5.0) ** 5

    def tail_cutoff(self, rel: float = TAIL_REL) -> float:
        """|tau| beyond which the |sinc|^5 envelope bound falls below rel*peak."""
        return 5.0 * rel ** (-1.0 / 5.0) / self.delta


def make_wavelet(delta: float) -> BSplineWavelet:
    """Construct the wavelet for half-bandwidth delta in (0, 1)."""
    return BSplineWavelet(float(delta))


def evaluate_time_domain(w: BSplineWavelet, tau) -> np.ndarray:
    """psi(tau) for an array of (finite) time offsets."""
    return w.time_domain(tau)


@dataclass(frozen=True)
class WaveletMoments:
    """The absolute moments i1 = int|psi|, i2 = int|tau psi'|, i3 = int|tau^2 psi''|."""

    i1: float
    i2: float
    i3: float


def _moment_integrands(w: BSplineWavelet, tau: np.ndarray):
    c = w.delta / 5.0
    K = w.peak_amplitude
    u = c * tau
    s = _sinc(u)
    sp = _sinc_d1(u)
    spp = _sinc_d2(u)
    S = s**5
    S1 = 5.0 * s**4 * sp * c
    S2 = (20.0 * s**3 * sp**2 + 5.0 * s**4 * spp) * c * c
    abs_psi = K * np.abs(S)
    abs_dpsi = K * np.hypot(S, S1)  # |i*S + S'|
    abs_d2psi = K * np.sqrt((S2 - S) ** 2 + 4.0 * S1**2)  # |-S + 2i S' + S''|
    return abs_psi, np.abs(tau) * abs_dpsi, tau**2 * abs_d2psi


@lru_cache(maxsize=64)
def moments(w: BSplineWavelet, rtol: float = 1e-6) -> WaveletMoments:
    """Absolute moments by adaptive quadrature with verified tail truncation.

    The integrands are even, carrier-free envelopes, so integration runs on
    [0, T].  The grid is refined and the domain doubled until both changes
    fall below ``rtol`` relative; otherwise a numerical-failure error reports
    the tolerance actually achieved.
    """
    c = w.delta / 5.0
    T = 800.0 / c  # sized so the |tau|^-5 envelope tail is < rtol for i3
    pts_per_lobe = 64  # sinc lobes have width pi/c
    n = int(T / (np.pi / c) * pts_per_lobe) + 1

    def compute(T, n):
        tau = np.linspace(0.0, T, n)
        f1, f2, f3 = _moment_integrands(w, tau)
        dx = T / (n - 1)
        return np.array([
            2.0 * np.trapezoid(f1, dx=dx),
            2.0 * np.trapezoid(f2, dx=dx),
            2.0 * np.trapezoid(f3, dx=dx),
        ])

    def reldiff(a, b):
        return float(np.max(np.abs(a - b) / np.abs(b)))

    vals = compute(T, n)
    step_err = np.inf
    for _ in range(6):  # halve the step until stable
        finer = compute(T, 2 * n - 1)
        step_err = reldiff(vals, finer)
        vals, n = finer, 2 * n - 1
        if step_err < 0.5 * rtol:
            break
    else:
        raise NumericalFailureError("moment quadrature did not converge in step", step_err)
    tail_err = np.inf
    for _ in range(6):  # double the domain at fixed spacing until the tail is negligible
        longer = compute(2 * T, 2 * n - 1)
        tail_err = reldiff(longer, vals)
        vals, T, n = longer, 2 * T, 2 * n - 1
        if tail_err < 0.5 * rtol:
            out = WaveletMoments(*map(float, vals))
            if not all(v > 0 and np.isfinite(v) for v in (out.i1, out.i2, out.i3)):
                raise NumericalFailureError(
                    "moment quadrature produced non-finite values", max(step_err, tail_err))
            return out
    raise NumericalFailureError("moment quadrature tail did not converge", tail_err)


@dataclass(frozen=True)
class Scalogram:
    """Wavelet transform values W(t, omega) on a (time x scale) grid.

    ``coeffs[i, j]`` is W at time ``times[i]`` and scale ``scales[j]``.  The
    ridge of a mode with frequency theta' sits near ``omega = 1/theta'``.
    ``unresolved_scales`` lists scales whose oscillation is sampled by fewer
    than 8 points per cycle on this grid.
    """

    times: np.ndarray
    scales: np.ndarray
    coeffs: np.ndarray
    wavelet: BSplineWavelet
    extension: str = "periodic"
    unresolved_scales: tuple = ()

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        s = np.array(self.scales, dtype=float)
        c = np.array(self.coeffs, dtype=complex)
        for arr in (t, s, c):
            arr.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "scales", s)
        object.__setattr__(self, "coeffs", c)
        if np.any(s <= 0) or np.any(np.diff(s) <= 0):
            raise InvalidInputError("scales must be positive and strictly increasing")
        if c.shape != (t.size, s.size):
            raise InvalidInputError("coeffs must have shape (n_times, n_scales)")
        if not np.all(np.isfinite(c.view(float))):
            raise InvalidInputError("coefficients must be finite")

    def magnitude(self) -> np.ndarray:
        return np.abs(self.coeffs)


def _extension_base(values: np.ndarray, mode: str) -> np.ndarray:
    """Samples of one full period of the periodic/mirror extension.

    periodic: period N-1 samples (the t1 sample coincides with t0).
    mirror:   even reflection about both endpoints, period 2(N-1).
    """
    if mode == "periodic":
        return values[:-1]
    if mode == "mirror":
        return np.concatenate([values, values[-2:0:-1]])
    raise InvalidInputError(f"unknown extension mode {mode!r}")


def _kernel_samples(w: BSplineWavelet, omega: float, h: float):
    """psi(q*h/omega) on the truncated integer offset grid q in [-Q, Q]."""
    Q = int(np.ceil(w.tail_cutoff() * omega / h))
    qs = np.arange(-Q, Q + 1)
    tau = qs * (h / omega)
    vals = w.peak_amplitude * np.exp(1j * tau) * _sinc(w.delta * tau / 5.0) ** 5
    return qs, vals


def _folded_kernel(w: BSplineWavelet, omega: float, h: float, period: int) -> np.ndarray:
    """Kernel psi(q*h/omega) truncated at the tail cutoff, folded modulo period.

    psi = K e^{i tau} S(tau) factors per fold: the carrier phase advances by
    a constant per period, so only the envelope S is evaluated over the full
    truncated range while the complex modulation stays one period long.
    """
    c1 = h / omega
    Q = int(np.ceil(w.tail_cutoff() * omega / h))
    n_back = Q // period + 1
    n_folds = (2 * Q + 1 + (n_back * period - Q) + period - 1) // period
    q0 = -n_back * period
    u = (w.delta * c1 / 5.0) * (q0 + np.arange(n_folds * period, dtype=float))
    s = _sinc(u)
    s2 = s * s
    S = s2 * s2 * s
    head = (-Q) - q0  # leading samples with q < -Q
    if head > 0:
        S[:head] = 0.0
    tail = n_folds * period - (Q + 1 - q0)  # trailing samples with q > Q
    if tail > 0:
        S[-tail:] = 0.0
    fold_phase = np.exp(1j * (q0 + np.arange(n_folds) * period) * c1)
    summed = fold_phase @ S.reshape(n_folds, period)
    return w.peak_amplitude * np.exp(1j * np.arange(period) * c1) * summed


def _threads_from_env(threads) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("SPARSETF_THREADS", "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def cwt(f: SampledSignal, w: BSplineWavelet, scales, extension: str = "periodic",
        threads: int | None = None) -> Scalogram:
    """Continuous wavelet transform on a grid of scales.

    ``W(t_i, w_j) = w_j^{-1/2} * sum_m f(tau_m) psi((tau_m - t_i)/w_j) * dt``
    with the sum running over the periodic (or mirror) extension of the
    signal, truncated where the wavelet envelope drops below 1e-8 of its
    peak.  Each scale is evaluated as a circular FFT correlation against the
    period-folded kernel, which reproduces the direct quadrature to round-off.
    """
    scales = np.asarray(scales, dtype=float)
    if scales.ndim != 1 or scales.size == 0:
        raise InvalidInputError("scales must be a non-empty 1-d array")
    if np.any(scales <= 0):
        raise InvalidInputError("all scales must be positive")
    if np.any(np.diff(scales) <= 0):
        raise InvalidInputError("scales must be strictly increasing")
    base = _extension_base(f.values, extension)
    P = base.size
    h = f.dt
    n = f.n
    # circular correlation via zero-padded FFT at a fast length (P itself can
    # be a worst-case FFT size, e.g. 2^k - 1), wrapped back modulo P
    L = next_fast_len(2 * P - 1)
    F = np.fft.fft(base, L)

    unresolved = tuple(float(s) for s in scales if 2 * np.pi * s < MIN_SAMPLES_PER_CYCLE * h)
    if unresolved:
        warnings.warn(
            f"{len(unresolved)} scale(s) sampled below {MIN_SAMPLES_PER_CYCLE} points "
            "per oscillation cycle; magnitudes there are unreliable",
            RuntimeWarning,
        )

    def one_scale(omega: float) -> np.ndarray:
        g = _folded_kernel(w, omega, h, P)
        grev = np.concatenate([g[:1], g[:0:-1]])  # g[(-j) mod P]
        lin = np.fft.ifft(F * np.fft.fft(grev, L))[: 2 * P - 1]
        row = lin[:P].copy()
        row[: P - 1] += lin[P:]
        row *= h / np.sqrt(omega)
        if extension == "periodic":
            return np.concatenate([row, row[:1]])  # t1 sample repeats t0
        return row[:n]

    nthreads = _threads_from_env(threads)
    if nthreads > 1:
        with ThreadPoolExecutor(max_workers=nthreads) as ex:
            cols = list(ex.map(one_scale, scales))
    else:
        cols = [one_scale(s) for s in scales]
    coeffs = np.stack(cols, axis=1)
    return Scalogram(f.times(), scales, coeffs, w, extension, unresolved)


def cwt_direct(f: SampledSignal, w: BSplineWavelet, scales, extension: str = "periodic") -> Scalogram:
    """Reference transform by explicit quadrature (identical definition to cwt).

    Quadratic cost per scale; intended for verification on short signals.
    """
    scales = np.asarray(scales, dtype=float)
    if np.any(scales <= 0):
        raise InvalidInputError("all scales must be positive")
    base = _extension_base(f.values, extension)
    P = base.size
    h = f.dt
    n = f.n
    out = np.empty((n, scales.size), dtype=complex)
    n_out = P if extension == "periodic" else n
    for j, omega in enumerate(scales):
        qs, kern = _kernel_samples(w, omega, h)
        col = np.empty(n_out, dtype=complex)
        for i in range(n_out):
            col[i] = np.dot(base[(i + qs) % P], kern)
        col *= h / np.sqrt(omega)
        if extension == "periodic":
            out[:, j] = np.concatenate([col, col[:1]])
        else:
            out[:, j] = col
    return Scalogram(f.times(), scales, out, w, extension)


def _transform_complex_mode(pair: PhasePair, w: BSplineWavelet, it: int, omega: float) -> complex:
    """(1/sqrt(omega)) * integral a(tau) e^{-i theta(tau)} psi((tau-t)/omega) dtau.

    Quadrature runs over the periodic extension of the pair: the envelope
    repeats with the span and the phase advances by theta(t1)-theta(t0) per
    period.
    """
    h = pair.dt
    P = pair.n - 1
    theta_span = pair.theta[-1] - pair.theta[0]
    qs, kern = _kernel_samples(w, omega, h)
    m = it + qs
    wrap = m // P
    idx = m - wrap * P
    z = pair.a[idx] * np.exp(-1j * (pair.theta[idx] + wrap * theta_span))
    return complex(np.dot(z, kern) * h / np.sqrt(omega))


def concentration_error(pair: PhasePair, w: BSplineWavelet, t: float, omega: float):
    """Deviation of the transform from its single-mode principal term.

    Returns ``(error, bound)`` where::

        error = | W(a e^{-i theta})(t, omega)/sqrt(omega)
                 - a(t) e^{-i theta(t)} psi_hat(omega * theta'(t)) |
        bound = C * eps_hat
        C = (A + 4|a(t)| + 1) i1 + (M' + (M'+1)|a(t)|) i2 + M' |a(t)| i3

    with ``eps_hat`` and ``M'`` the slow-variation metrics measured from the
    pair and ``A = sup|a|``.  The probe time snaps to the nearest grid point.
    """
    if omega <= 0:
        raise InvalidInputError("omega must be positive")
    from .separation import check_scale_separation

    report = check_scale_separation(pair, eps=1.0)
    eps_hat = max(report.eps_envelope, report.eps_frequency)
    it = int(round((t - pair.t0) / pair.dt))
    it = min(max(it, 0), pair.n - 1)
    theta_p = pair.theta_prime()

    W = _transform_complex_mode(pair, w, it, omega)
    main = pair.a[it] * np.exp(-1j * pair.theta[it]) * w.freq_response(omega * theta_p[it])
    error = float(abs(W / np.sqrt(omega) - main))

    mom = moments(w)
    A = float(np.max(pair.a))
    at = float(pair.a[it])
    mp = report.m_prime
    C = (A + 4.0 * at + 1.0) * mom.i1 + (mp + (mp + 1.0) * at) * mom.i2 + mp * at * mom.i3
    return error, float(C * eps_hat)


def default_scales(f: SampledSignal, w: BSplineWavelet, voices: int = 32,
                   fmin: float | None = None, fmax: float | None = None) -> np.ndarray:
    """Logarithmic scale grid covering [1/(2*pi*fmax), 1/(2*pi*fmin)].

    When the frequency band is not supplied it is estimated from the
    amplitude spectrum (bins above 2% of the peak, padded by a third of an
    octave on each side).
    """
    if voices < 1:
        raise InvalidInputError("voices must be >= 1")
    if fmin is None or fmax is None:
        vals = f.values - np.mean(f.values)
        mag = np.abs(np.fft.rfft(vals[:-1]))
        freqs = np.fft.rfftfreq(f.n - 1, d=f.dt)
        mag[0] = 0.0
        peak = np.max(mag)
        if peak <= 0:
            raise InvalidInputError("signal has no spectral content to size scales from")
        active = freqs[mag >= 0.02 * peak]
        est_lo, est_hi = float(active.min()), float(active.max())
        if fmin is None:
            fmin = est_lo * 0.75
        if fmax is None:
            fmax = est_hi * 1.35
    if not 0 < fmin < fmax:
        raise InvalidInputError("need 0 < fmin < fmax")
    lo = 1.0 / (2.0 * np.pi * fmax)
    hi = 1.0 / (2.0 * np.pi * fmin)
    n = int(np.ceil(voices * np.log2(hi / lo))) + 1
    return lo * (hi / lo) ** (np.arange(n) / (n - 1))
