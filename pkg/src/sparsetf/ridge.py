"""Ridge extraction from scalograms and decomposition comparison.

A mode with instantaneous frequency theta' produces a transform magnitude
ridge along ``omega(t) = 1/theta'(t)``.  On the ridge the frequency response
peaks at 1, so for a real signal ``a = 2|W|/sqrt(omega)`` and the transform
phase tracks ``-theta``.  Ridges are followed across time by nearest
log-scale continuity; modes whose scale bands touch cannot be told apart and
are reported as ambiguous.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InvalidInputError
from .signal import (Decomposition, PhasePair, SampledSignal,
                     cumulative_integral)
from .wavelet import BSplineWavelet, Scalogram, cwt, default_scales

__all__ = [
    "RidgeCurve",
    "ComparisonReport",
    "extract_ridges",
    "ridges_ambiguous",
    "recover_components",
    "compare_decompositions",
]

#: Curves shorter than this fraction of the time span are discarded.
MIN_CURVE_FRACTION = 0.05

#: Fragment-merge window: curves of one mode broken by a brief detection gap
#: are rejoined when the gap is below this fraction of the span and the
#: frequency jump below MERGE_LOG_CAP (well under any component separation).
MERGE_GAP_FRACTION = 0.02
MERGE_LOG_CAP = float(np.log(1.35))


@dataclass(frozen=True)
class RidgeCurve:
    """One linked curve of per-time magnitude maxima in the (t, omega) plane."""

    times: np.ndarray      # grid subset covered by the curve
    omega: np.ndarray      # sub-grid-refined ridge scale per time
    magnitude: np.ndarray  # refined |W| along the curve
    phase: np.ndarray      # unwrapped -arg W along the curve

    def __post_init__(self):
        for name in ("times", "omega", "magnitude", "phase"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any(self.omega <= 0):
            raise InvalidInputError("ridge scales must be positive")

    @property
    def n(self) -> int:
        return self.times.size

    def strength(self) -> float:
        """Summed squared magnitude; used to rank curves."""
        return float(np.sum(self.magnitude**2))


@dataclass(frozen=True)
class ComparisonReport:
    """Component-wise distance between two decompositions.

    Components are matched by minimizing the summed mean ``|log(theta'/theta~')|``
    over an optimal assignment.  Phase errors are computed after removing the
    best whole-cycle (2*pi) offset, since shifted phases describe the same
    mode; ``recon_sup_errors`` / ``recon_rel_l2_errors`` compare the cosine
    reconstructions directly and are parameterization-free.
    """

    matched: tuple                 # pairs (index in x, index in y)
    amp_errors: tuple              # sup |a - a~| per matched pair
    phase_errors: tuple            # sup |theta - theta~| / theta' per matched pair
    recon_sup_errors: tuple        # sup |a cos theta - a~ cos theta~|
    recon_rel_l2_errors: tuple     # L2 of the difference over L2 of the first
    counts_equal: bool


def _refined_peaks(mags: np.ndarray, coeffs: np.ndarray, scales: np.ndarray,
                   threshold: float):
    """Per-time local maxima above the threshold, refined to sub-grid scale.

    Interior maxima of each time slice are interpolated log-parabolically
    across the three neighboring scale samples.  Returns parallel arrays
    (time index, refined omega, refined magnitude, phase).
    """
    interior = mags[:, 1:-1]
    with np.errstate(divide="ignore"):
        mask = (interior > mags[:, :-2]) & (interior >= mags[:, 2:]) & (interior > threshold)
        ti, js = np.nonzero(mask)
        js = js + 1
        y0 = np.log(mags[ti, js - 1])
        y1 = np.log(mags[ti, js])
        y2 = np.log(mags[ti, js + 1])
    denom = y0 - 2.0 * y1 + y2
    shift = np.where(denom < 0, 0.5 * (y0 - y2) / np.where(denom < 0, denom, 1.0), 0.0)
    shift = np.clip(shift, -0.5, 0.5)
    dlog = np.where(shift >= 0,
                    np.log(scales[np.minimum(js + 1, scales.size - 1)] / scales[js]),
                    np.log(scales[js] / scales[js - 1]))
    omega = scales[js] * np.exp(shift * dlog)
    mag = np.exp(y1 - 0.25 * (y0 - y2) * shift)
    phase = np.angle(coeffs[ti, js])
    return ti, omega, mag, phase


def extract_ridges(s: Scalogram, floor: float) -> list[RidgeCurve]:
    """Link per-time magnitude maxima above ``floor * max`` into curves.

    Peak detection runs on the normalized magnitude ``|W|/sqrt(omega)``,
    whose maximum sits exactly on the ridge ``omega * theta' = 1`` (the raw
    magnitude peak is biased by the sqrt(omega) prefactor).  Maxima are
    refined to sub-grid scale by log-parabolic interpolation and linked to
    the nearest active curve in log-scale, capped at one octave per 1% of
    the span per step (slowly varying frequencies cannot move faster).
    Curves covering less than 5% of the span are dropped.
    """
    if s.times.size == 0 or s.scales.size < 3:
        raise InvalidInputError("scalogram is empty or has too few scales")
    if not floor > 0:
        raise InvalidInputError("floor must be positive")
    mags = s.magnitude() / np.sqrt(s.scales)[None, :]
    gmax = float(np.max(mags))
    if gmax == 0.0:
        return []
    threshold = floor * gmax
    nt = s.times.size
    dt = s.times[1] - s.times[0]
    span = s.times[-1] - s.times[0]
    step_cap = np.log(2.0) * dt / (0.01 * span)
    grid_step = float(np.max(np.log(s.scales[1:] / s.scales[:-1])))
    cap = max(step_cap, 1.5 * grid_step)

    ti_all, om_all, mag_all, ph_all = _refined_peaks(mags, s.coeffs, s.scales, threshold)
    mag_all = mag_all * np.sqrt(om_all)  # back to raw |W| along the curve
    starts = np.searchsorted(ti_all, np.arange(nt + 1))

    active: list[dict] = []
    closed: list[dict] = []
    for i in range(nt):
        lo_i, hi_i = starts[i], starts[i + 1]
        found = list(zip(om_all[lo_i:hi_i], mag_all[lo_i:hi_i], ph_all[lo_i:hi_i]))
        # unique nearest-log-scale assignment between active curves and new peaks
        cands = []
        for ci, c in enumerate(active):
            for pi, (om, _, _) in enumerate(found):
                cost = abs(np.log(om / c["omega"][-1]))
                if cost <= cap:
                    cands.append((cost, ci, pi))
        cands.sort(key=lambda x: x[0])
        used_c, used_p = set(), set()
        matches = {}
        for cost, ci, pi in cands:
            if ci in used_c or pi in used_p:
                continue
            used_c.add(ci)
            used_p.add(pi)
            matches[ci] = pi
        nxt = []
        for ci, c in enumerate(active):
            if ci in matches:
                om, mag, ph = found[matches[ci]]
                c["t"].append(s.times[i])
                c["omega"].append(om)
                c["mag"].append(mag)
                c["ph"].append(ph)
                nxt.append(c)
            else:
                closed.append(c)
        for pi, (om, mag, ph) in enumerate(found):
            if pi not in used_p:
                nxt.append({"t": [s.times[i]], "omega": [om], "mag": [mag], "ph": [ph]})
        active = nxt
    closed.extend(active)
    closed = _merge_fragments(closed, span)

    curves = []
    min_len = max(2, int(np.ceil(MIN_CURVE_FRACTION * nt)))
    for c in closed:
        if len(c["t"]) < min_len:
            continue
        phase = _unwrap_along(np.asarray(c["ph"]), np.asarray(c["t"]), np.asarray(c["omega"]))
        curves.append(RidgeCurve(np.asarray(c["t"]), np.asarray(c["omega"]),
                                 np.asarray(c["mag"]), phase))
    curves.sort(key=lambda c: float(np.mean(c.omega)), reverse=True)  # low frequency first
    return curves


def _unwrap_along(ph_raw: np.ndarray, times: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """Unwrap -arg W along a curve, bridging gaps with the ridge frequency.

    Plain unwrapping assumes less than half a cycle between samples; merged
    fragments can skip many cycles, so the whole-cycle count of each step is
    taken from the expected phase advance ``theta' * dt``.
    """
    neg = -ph_raw
    d = np.diff(neg)
    expected = np.diff(times) * 0.5 * (1.0 / omega[:-1] + 1.0 / omega[1:])
    k = np.round((expected - d) / (2.0 * np.pi))
    return neg[0] + np.concatenate([[0.0], np.cumsum(d + 2.0 * np.pi * k)])


def ridges_ambiguous(curves: list[RidgeCurve], delta: float, span: tuple[float, float]) -> bool:
    """True when ridge identities cannot be resolved at half-bandwidth delta.

    Two situations are flagged: a pair of coexisting curves whose scales come
    closer than the band-overlap ratio (1+delta)/(1-delta), and a curve that
    is born or dies away from the span boundaries (a merge/split event).
    """
    overlap_ratio = np.log((1.0 + delta) / (1.0 - delta))
    t0, t1 = span
    margin = MIN_CURVE_FRACTION * (t1 - t0)
    for c in curves:
        if c.times[0] > t0 + margin or c.times[-1] < t1 - margin:
            return True
    for i in range(len(curves)):
        for j in range(i + 1, len(curves)):
            a, b = curves[i], curves[j]
            lo = max(a.times[0], b.times[0])
            hi = min(a.times[-1], b.times[-1])
            if lo > hi:
                continue
            sa = (a.times >= lo) & (a.times <= hi)
            sb = (b.times >= lo) & (b.times <= hi)
            na, nb = np.count_nonzero(sa), np.count_nonzero(sb)
            k = min(na, nb)
            if k == 0:
                continue
            gap = np.abs(np.log(a.omega[sa][:k] / b.omega[sb][:k]))
            if np.any(gap < overlap_ratio):
                return True
    return False


def _merge_fragments(raw: list[dict], span: float) -> list[dict]:
    """Rejoin curve fragments separated by a short gap and a small frequency jump."""
    max_gap = MERGE_GAP_FRACTION * span
    out: list[dict] = []
    for c in sorted(raw, key=lambda c: c["t"][0]):
        merged = False
        for o in out:
            gap = c["t"][0] - o["t"][-1]
            if -max_gap <= gap <= max_gap:
                keep = 0
                if gap < 0:  # drop the head of c that overlaps o
                    keep = int(np.searchsorted(np.asarray(c["t"]), o["t"][-1], side="right"))
                    if keep >= len(c["t"]):
                        continue
                if abs(np.log(c["omega"][keep] / o["omega"][-1])) <= MERGE_LOG_CAP:
                    for key in ("t", "omega", "mag", "ph"):
                        o[key].extend(c[key][keep:])
                    merged = True
                    break
        if not merged:
            out.append(c)
    return out


def _moving_average(x: np.ndarray, window: int) -> np.ndarray:
    window = max(1, min(window, 2 * (x.size // 2) - 1))
    if window % 2 == 0:
        window += 1
    if window <= 1:
        return x.copy()
    half = window // 2
    padded = np.concatenate([x[half:0:-1], x, x[-2 : -half - 2 : -1]])
    kernel = np.full(window, 1.0 / window)
    return np.convolve(padded, kernel, mode="valid")


#: Never amplify deconvolved envelope content by more than 1/this factor
#: (strong attenuation cannot be undone without also amplifying noise).
ENVELOPE_GAIN_FLOOR = 0.5


def _deconvolve_envelope(amp: np.ndarray, mean_freq: float, w: BSplineWavelet,
                         extension: str) -> np.ndarray:
    """Undo the analysis-band attenuation of envelope harmonics.

    Envelope content at nu cycles/span rides at relative frequency offsets
    +-nu/f from the carrier and is picked up attenuated by the symmetric band
    response H(nu) = (psi_hat(1+nu/f) + psi_hat(1-nu/f))/2.  Dividing the
    envelope spectrum by H (gain-limited) restores it.
    """
    if extension == "mirror":
        base = np.concatenate([amp, amp[-2:0:-1]])
        span_cycles = 2.0 * mean_freq
    else:
        base = amp[:-1]
        span_cycles = mean_freq
    A = np.fft.rfft(base)
    nu = np.arange(A.size) / span_cycles  # relative frequency offset nu/f
    H = 0.5 * (w.freq_response(1.0 + nu) + w.freq_response(1.0 - nu))
    A /= np.maximum(H, ENVELOPE_GAIN_FLOOR)
    out = np.fft.irfft(A, base.size)
    if extension == "mirror":
        return out[: amp.size]
    return np.concatenate([out, out[:1]])


def _pair_from_curve(f: SampledSignal, curve: RidgeCurve, w: BSplineWavelet,
                     extension: str) -> PhasePair:
    """Envelope and phase for one curve, extended to the full grid.

    theta' = 1/omega along the ridge, held constant beyond the curve ends,
    smoothed over one mean carrier period and integrated.  The integrated
    phase is then anchored to the unwrapped transform phase along the curve
    (a slowly varying correction, held constant beyond the ends): the
    transform phase tracks the true phase pointwise even where the magnitude
    peak lags a fast frequency sweep.  The envelope is 2|W|/sqrt(omega) (the
    factor 2 restores the analytic-signal convention for real input),
    deconvolved by the known band response.
    """
    times = f.times()
    h = f.dt
    theta_p_r = 1.0 / curve.omega
    theta_p = np.interp(times, curve.times, theta_p_r)
    window = int(round(2.0 * np.pi / float(np.mean(theta_p)) / h))
    theta_p = _moving_average(theta_p, window)
    theta = cumulative_integral(theta_p, h)
    drift = curve.phase - np.interp(curve.times, times, theta)
    window_c = max(1, int(round(window * curve.n / f.n)))
    correction = np.interp(times, curve.times, _moving_average(drift, window_c))
    candidate = theta + correction
    if np.all(np.diff(candidate) > 0):
        theta = candidate
    else:  # correction too aggressive (noisy curve); keep the midpoint anchor
        mid = f.n // 2
        anchor = float(np.interp(times[mid], curve.times, curve.phase))
        theta = theta - theta[mid] + anchor
    amp_r = 2.0 * curve.magnitude / np.sqrt(curve.omega)
    amp = np.interp(times, curve.times, amp_r)
    mean_freq = float(np.mean(theta_p)) / (2.0 * np.pi)
    amp = _deconvolve_envelope(amp, mean_freq, w, extension)
    amp = np.maximum(amp, 1e-12 * max(float(np.max(amp)), 1.0))
    return PhasePair(f.t0, f.t1, amp, theta)


def recover_components(f: SampledSignal, w: BSplineWavelet, floor: float | None = None,
                       scales=None, voices: int = 32,
                       extension: str = "periodic") -> list[PhasePair]:
    """Recover (envelope, phase) pairs from the transform ridges of a signal.

    ``floor`` is the magnitude threshold relative to the transform peak; the
    default is 3x the median magnitude (a robust noise floor).  Returns pairs
    ordered by increasing mean frequency; an empty list if nothing rises
    above the floor.
    """
    if not np.any(f.values != 0):
        return []
    if scales is None:
        scales = default_scales(f, w, voices=voices)
    s = cwt(f, w, scales, extension=extension)
    mags = s.magnitude() / np.sqrt(s.scales)[None, :]
    gmax = float(np.max(mags))
    if gmax == 0.0:
        return []
    if floor is None:
        floor = 3.0 * float(np.median(mags)) / gmax
        floor = min(max(floor, 1e-6), 0.5)
    curves = extract_ridges(s, floor)
    pairs = [_pair_from_curve(f, c, w, extension) for c in curves]
    pairs.sort(key=lambda p: float(np.mean(p.theta_prime())))
    return pairs


def compare_decompositions(x: Decomposition, y: Decomposition) -> ComparisonReport:
    """Match components of two decompositions and report their distances."""
    if not x.residual.same_grid(y.residual):
        raise InvalidInputError("decompositions must live on one grid")
    cx, cy = list(x.components), list(y.components)
    if not cx or not cy:
        return ComparisonReport((), (), (), (), (), len(cx) == len(cy))
    fx = [c.theta_prime() for c in cx]
    fy = [c.theta_prime() for c in cy]
    cost = np.empty((len(cx), len(cy)))
    for i in range(len(cx)):
        for j in range(len(cy)):
            cost[i, j] = float(np.mean(np.abs(np.log(fx[i] / fy[j]))))
    rows, cols = linear_sum_assignment(cost)
    matched, amp_e, phase_e, sup_e, rel_e = [], [], [], [], []
    for i, j in zip(rows, cols):
        a, b = cx[i], cy[j]
        matched.append((int(i), int(j)))
        amp_e.append(float(np.max(np.abs(a.a - b.a))))
        dtheta = a.theta - b.theta
        dtheta = dtheta - 2.0 * np.pi * np.round(np.median(dtheta) / (2.0 * np.pi))
        phase_e.append(float(np.max(np.abs(dtheta) / fx[i])))
        diff = a.a * np.cos(a.theta) - b.a * np.cos(b.theta)
        sup_e.append(float(np.max(np.abs(diff))))
        base = a.mode().norm()
        rel_e.append(float(np.sqrt(np.trapezoid(diff**2, dx=a.dt))) / base if base > 0 else np.inf)
    return ComparisonReport(tuple(matched), tuple(amp_e), tuple(phase_e),
                            tuple(sup_e), tuple(rel_e), len(cx) == len(cy))
