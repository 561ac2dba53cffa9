"""Core signal types and calculus on uniform time grids.

Everything downstream works with real-valued samples on a uniform grid
``t_i = t0 + i*(t1-t0)/(N-1)``.  Integrals are composite trapezoidal
quadrature, derivatives are second-order finite differences, and phases are
stored unwrapped (monotone), never modulo 2*pi.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import InvalidInputError

__all__ = [
    "SampledSignal",
    "PhasePair",
    "DictionaryParams",
    "Decomposition",
    "differentiate",
    "cumulative_integral",
    "inner_product",
    "l2_norm",
    "reconstruct",
]

#: Relative tolerance for deciding that two signals share a grid.
GRID_RTOL = 1e-9


def _as_readonly_f64(x) -> np.ndarray:
    arr = np.array(x, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SampledSignal:
    """A real signal sampled on the uniform grid over ``[t0, t1]``.

    Attributes
    ----------
    t0, t1 : float
        Time span in seconds, ``t1 > t0``.
    values : np.ndarray
        Samples at ``t_i = t0 + i*(t1-t0)/(N-1)``, ``N >= 2``, all finite.
    """

    t0: float
    t1: float
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _as_readonly_f64(self.values))
        if self.values.ndim != 1 or self.values.size < 2:
            raise InvalidInputError("signal needs at least 2 samples on a 1-d grid")
        if not self.t1 > self.t0:
            raise InvalidInputError(f"need t1 > t0, got [{self.t0}, {self.t1}]")
        if not np.all(np.isfinite(self.values)):
            raise InvalidInputError("signal values must be finite")

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def dt(self) -> float:
        return (self.t1 - self.t0) / (self.n - 1)

    @property
    def span(self) -> float:
        return self.t1 - self.t0

    def times(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.n)

    def same_grid(self, other) -> bool:
        scale = max(abs(self.t0), abs(self.t1), 1.0)
        return (
            self.n == other.n
            and abs(self.t0 - other.t0) <= GRID_RTOL * scale
            and abs(self.t1 - other.t1) <= GRID_RTOL * scale
        )

    def norm(self) -> float:
        """L2 norm by trapezoidal quadrature over the span."""
        return float(np.sqrt(np.trapezoid(self.values**2, dx=self.dt)))


@dataclass(frozen=True)
class PhasePair:
    """An (envelope, phase) pair parameterizing one candidate mode a*cos(theta).

    ``a`` must be strictly positive and ``theta`` strictly increasing on the
    grid; ``theta`` is the unwrapped phase in radians.
    """

    t0: float
    t1: float
    a: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", _as_readonly_f64(self.a))
        object.__setattr__(self, "theta", _as_readonly_f64(self.theta))
        if self.a.shape != self.theta.shape or self.a.ndim != 1 or self.a.size < 2:
            raise InvalidInputError("a and theta must be 1-d arrays of equal length >= 2")
        if not self.t1 > self.t0:
            raise InvalidInputError(f"need t1 > t0, got [{self.t0}, {self.t1}]")
        if not (np.all(np.isfinite(self.a)) and np.all(np.isfinite(self.theta))):
            raise InvalidInputError("envelope and phase must be finite")
        if np.any(self.a <= 0):
            raise InvalidInputError("envelope must be strictly positive")
        if np.any(np.diff(self.theta) <= 0):
            raise InvalidInputError("phase must be strictly increasing")

    @property
    def n(self) -> int:
        return self.a.size

    @property
    def dt(self) -> float:
        return (self.t1 - self.t0) / (self.n - 1)

    def times(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.n)

    def same_grid(self, other) -> bool:
        scale = max(abs(self.t0), abs(self.t1), 1.0)
        return (
            self.n == other.n
            and abs(self.t0 - other.t0) <= GRID_RTOL * scale
            and abs(self.t1 - other.t1) <= GRID_RTOL * scale
        )

    def theta_prime(self) -> np.ndarray:
        """Instantaneous frequency theta'(t) by finite differences."""
        return differentiate(self.theta, self.dt)

    def mode(self) -> SampledSignal:
        """The mode a(t)*cos(theta(t)) as a signal."""
        return SampledSignal(self.t0, self.t1, self.a * np.cos(self.theta))


@dataclass(frozen=True)
class DictionaryParams:
    """Admissibility parameters for candidate modes.

    epsilon
        Separation factor bounding ``|a'/theta'|`` and ``|theta''/theta'^2|``.
    d
        Minimum pointwise frequency ratio between adjacent components.
    m_prime
        Bound on ``sup theta' / inf theta'`` for a single component.
    epsilon0
        Residual threshold (in signal units) that stops the pursuit.
    """

    epsilon: float
    d: float
    m_prime: float = 2.0
    epsilon0: float = 1e-2

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise InvalidInputError(f"epsilon must be in (0,1), got {self.epsilon}")
        if not self.d > 1:
            raise InvalidInputError(f"d must exceed 1, got {self.d}")
        if not self.m_prime >= 1:
            raise InvalidInputError(f"m_prime must be >= 1, got {self.m_prime}")
        if not self.epsilon0 > 0:
            raise InvalidInputError(f"epsilon0 must be positive, got {self.epsilon0}")


@dataclass(frozen=True)
class Decomposition:
    """An ordered mode decomposition plus residual.

    Components are ordered by increasing mean instantaneous frequency.
    ``reconstruct(components) + residual`` equals the decomposed signal to
    grid round-off.  ``diagnostics`` carries one separation report per
    component (same order); ``extraction_order[i]`` is the position of
    component ``i`` in the greedy extraction sequence.
    """

    components: tuple
    residual: SampledSignal
    diagnostics: tuple = ()
    extraction_order: tuple = ()
    no_progress: bool = False

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "diagnostics", tuple(self.diagnostics))
        object.__setattr__(self, "extraction_order", tuple(self.extraction_order))
        for c in self.components:
            if not c.same_grid(self.residual):
                raise InvalidInputError("component grid differs from residual grid")

    @property
    def n_components(self) -> int:
        return len(self.components)

    def signal(self) -> SampledSignal:
        """The signal this decomposition represents."""
        if not self.components:
            return self.residual
        total = reconstruct(list(self.components))
        return SampledSignal(self.residual.t0, self.residual.t1,
                             total.values + self.residual.values)


def differentiate(x, dt: float) -> np.ndarray:
    """First derivative on a uniform grid.

    Central differences in the interior, second-order one-sided stencils at
    both endpoints; the result has the same length as the input.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 3:
        raise InvalidInputError("differentiate needs a 1-d array of length >= 3")
    if dt <= 0:
        raise InvalidInputError("dt must be positive")
    return np.gradient(x, dt, edge_order=2)


def cumulative_integral(x, dt: float) -> np.ndarray:
    """Cumulative trapezoidal integral anchored at 0 for the first sample."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise InvalidInputError("cumulative_integral needs a 1-d array of length >= 2")
    return cumulative_trapezoid(x, dx=dt, initial=0.0)


def inner_product(x: SampledSignal, y: SampledSignal) -> float:
    """Trapezoidal quadrature of x*y over the common span."""
    if not x.same_grid(y):
        raise InvalidInputError("inner_product requires identical grids")
    return float(np.trapezoid(x.values * y.values, dx=x.dt))


def l2_norm(x: SampledSignal) -> float:
    return x.norm()


def reconstruct(pairs: Sequence[PhasePair]) -> SampledSignal:
    """Pointwise sum of a_k(t)*cos(theta_k(t)) over a shared grid."""
    if not pairs:
        raise InvalidInputError("reconstruct needs at least one pair")
    first = pairs[0]
    total = np.zeros(first.n)
    for p in pairs:
        if not p.same_grid(first):
            raise InvalidInputError("all pairs must share one grid")
        total += p.a * np.cos(p.theta)
    return SampledSignal(first.t0, first.t1, total)
