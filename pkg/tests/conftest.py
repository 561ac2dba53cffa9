import numpy as np
import pytest

from sparsetf import PhasePair, SampledSignal


def tone(freq_hz: float, n: int = 4096, amp: float = 1.0, span=(0.0, 1.0)) -> SampledSignal:
    t = np.linspace(span[0], span[1], n)
    return SampledSignal(span[0], span[1], amp * np.cos(2 * np.pi * freq_hz * t))


def tone_pair(freq_hz: float, n: int = 4096, amp: float = 1.0, span=(0.0, 1.0),
              phase0: float = 0.0) -> PhasePair:
    t = np.linspace(span[0], span[1], n)
    return PhasePair(span[0], span[1], np.full(n, amp), 2 * np.pi * freq_hz * t + phase0)


@pytest.fixture
def grid_1024():
    return np.linspace(0.0, 1.0, 1024)
