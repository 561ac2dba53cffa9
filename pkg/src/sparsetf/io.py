"""File formats: signal CSV, decomposition / scalogram / report JSON, run manifests.

Signal CSV: header ``t,value``, one row per sample, strictly increasing t.
Equal spacing is required up to a relative deviation of 1e-9; non-uniform
input can be resampled at ingestion by linear interpolation.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InvalidInputError
from .ridge import ComparisonReport
from .separation import (CrossTermResult, NormEquivalenceResult,
                         PairwiseSeparation, SeparationReport)
from .signal import Decomposition, PhasePair, SampledSignal
from .synth import GroundTruth
from .wavelet import Scalogram

__all__ = [
    "RunManifest",
    "read_signal_csv",
    "write_signal_csv",
    "decomposition_to_dict",
    "decomposition_from_dict",
    "write_decomposition_json",
    "read_decomposition_json",
    "scalogram_to_dict",
    "write_scalogram_json",
    "separation_report_to_dict",
    "pairwise_separation_to_dict",
    "ridge_curves_to_dict",
    "ground_truth_to_dict",
    "write_run_manifest",
]

SPACING_RTOL = 1e-9


def read_signal_csv(path, resample: bool = True) -> SampledSignal:
    """Parse a ``t,value`` CSV into a signal on a uniform grid.

    Raises invalid-input errors with the offending line number.  When the
    grid is non-uniform beyond tolerance the samples are linearly resampled
    onto the uniform grid with the same endpoints and count (or an error is
    raised when ``resample`` is off).
    """
    path = Path(path)
    ts, vs = [], []
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise InvalidInputError(f"{path}: line 1: empty file, expected header 't,value'")
    header = [c.strip().lower() for c in lines[0].split(",")]
    if header[:2] != ["t", "value"]:
        raise InvalidInputError(f"{path}: line 1: expected header 't,value', got {lines[0]!r}")
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != 2:
            raise InvalidInputError(f"{path}: line {lineno}: expected 2 fields, got {len(cells)}")
        try:
            ts.append(float(cells[0]))
            vs.append(float(cells[1]))
        except ValueError as exc:
            raise InvalidInputError(f"{path}: line {lineno}: {exc}") from None
    if len(ts) < 2:
        raise InvalidInputError(f"{path}: need at least 2 samples, got {len(ts)}")
    t = np.asarray(ts)
    v = np.asarray(vs)
    dts = np.diff(t)
    if np.any(dts <= 0):
        bad = int(np.argmax(dts <= 0)) + 3  # +2 header/0-base, +1 for the second point
        raise InvalidInputError(f"{path}: line {bad}: t must be strictly increasing")
    mean_dt = (t[-1] - t[0]) / (t.size - 1)
    if np.max(np.abs(dts - mean_dt)) > SPACING_RTOL * mean_dt:
        if not resample:
            raise InvalidInputError(f"{path}: grid is not uniform within {SPACING_RTOL:g} relative")
        uniform = np.linspace(t[0], t[-1], t.size)
        v = np.interp(uniform, t, v)
    return SampledSignal(float(t[0]), float(t[-1]), v)


def write_signal_csv(path, s: SampledSignal):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,value\n")
        for ti, vi in zip(s.times(), s.values):
            fh.write(f"{float(ti)!r},{float(vi)!r}\n")


def decomposition_to_dict(d: Decomposition) -> dict:
    return {
        "grid": {"t0": d.residual.t0, "t1": d.residual.t1, "n": d.residual.n},
        "components": [
            {"a": c.a.tolist(), "theta": c.theta.tolist()} for c in d.components
        ],
        "residual": d.residual.values.tolist(),
    }


def decomposition_from_dict(obj: dict) -> Decomposition:
    try:
        g = obj["grid"]
        t0, t1, n = float(g["t0"]), float(g["t1"]), int(g["n"])
        comps = [
            PhasePair(t0, t1, np.asarray(c["a"], float), np.asarray(c["theta"], float))
            for c in obj["components"]
        ]
        residual = SampledSignal(t0, t1, np.asarray(obj["residual"], float))
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"malformed decomposition JSON: missing {exc}") from None
    if any(c.n != n for c in comps) or residual.n != n:
        raise InvalidInputError("decomposition arrays disagree with grid length")
    return Decomposition(tuple(comps), residual)


def write_decomposition_json(path, d: Decomposition):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(decomposition_to_dict(d), fh)


def read_decomposition_json(path) -> Decomposition:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return decomposition_from_dict(obj)


def scalogram_to_dict(s: Scalogram) -> dict:
    """Times, scales, and the complex matrix as interleaved re/im, row-major by time."""
    interleaved = np.empty(s.coeffs.size * 2)
    interleaved[0::2] = s.coeffs.real.ravel(order="C")
    interleaved[1::2] = s.coeffs.imag.ravel(order="C")
    return {
        "times": s.times.tolist(),
        "scales": s.scales.tolist(),
        "delta": s.wavelet.delta,
        "extension": s.extension,
        "coeffs_interleaved": interleaved.tolist(),
        "unresolved_scales": list(s.unresolved_scales),
    }


def write_scalogram_json(path, s: Scalogram):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scalogram_to_dict(s), fh)


def separation_report_to_dict(r: SeparationReport) -> dict:
    return {
        "eps_envelope": r.eps_envelope,
        "eps_frequency": r.eps_frequency,
        "m_prime": r.m_prime,
        "in_dictionary": r.in_dictionary,
    }


def pairwise_separation_to_dict(p: PairwiseSeparation) -> dict:
    return {"d_min": p.d_min, "ratios": p.ratios.tolist(), "meets_d": p.meets_d}


def norm_equivalence_to_dict(r: NormEquivalenceResult) -> dict:
    return asdict(r)


def cross_term_to_dict(r: CrossTermResult) -> dict:
    return asdict(r)


def comparison_report_to_dict(r: ComparisonReport) -> dict:
    return {
        "matched": [list(m) for m in r.matched],
        "amp_errors": list(r.amp_errors),
        "phase_errors": list(r.phase_errors),
        "recon_sup_errors": list(r.recon_sup_errors),
        "recon_rel_l2_errors": list(r.recon_rel_l2_errors),
        "counts_equal": r.counts_equal,
    }


def ridge_curves_to_dict(curves) -> dict:
    return {
        "curves": [
            {
                "times": c.times.tolist(),
                "omega": c.omega.tolist(),
                "magnitude": c.magnitude.tolist(),
                "phase": c.phase.tolist(),
            }
            for c in curves
        ]
    }


def ground_truth_to_dict(g: GroundTruth) -> dict:
    return {
        "grid": {"t0": g.residual.t0, "t1": g.residual.t1, "n": g.residual.n},
        "components": [{"a": p.a.tolist(), "theta": p.theta.tolist()} for p in g.pairs],
        "residual": g.residual.values.tolist(),
        "params": {
            "epsilon": g.params.epsilon,
            "d": g.params.d,
            "m_prime": g.params.m_prime,
            "epsilon0": g.params.epsilon0,
        },
    }


@dataclass(frozen=True)
class RunManifest:
    """Reproducibility record written alongside every command's outputs."""

    command: str
    config: dict
    input_digest: dict
    tool_version: str = __version__


def _digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_run_manifest(out_dir, command: str, config: dict, input_paths: list):
    out_dir = Path(out_dir)
    manifest = RunManifest(
        command=command,
        config=config,
        input_digest={str(p): _digest(p) for p in input_paths},
    )
    with open(out_dir / "run_manifest.json", "w", encoding="utf-8") as fh:
        json.dump(asdict(manifest), fh, indent=2)
    return manifest
