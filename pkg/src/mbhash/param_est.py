"""
Parameter estimation on sacrificed pairs.

Consecutive pairs form pairs-of-pairs: the first is measured with X (x) X,
the second with Z (x) Z, and the sample is 1 when both give +1.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ._validation import ParameterError
from .bell import BellLabel, q_to_fidelity
from .regimes import modified_pe_interval


class Decision(enum.Enum):
    CONTINUE = "continue"
    ABORT = "abort"


class PEMode(enum.Enum):
    RAW = "raw"
    CALIBRATED = "calibrated"


def werner_statistic(F):
    """Mean of the pair-of-pairs statistic on Werner states of fidelity ``F``."""
    return ((2.0 * np.asarray(F, dtype=np.float64) + 1.0) / 3.0) ** 2


@dataclass(frozen=True)
class PEWindow:
    F_min: float
    F_max: float
    infeasible: bool = False

    def __post_init__(self):
        if not float(self.F_max) > float(self.F_min):
            raise ParameterError(f"empty PE window [{self.F_min!r}, {self.F_max!r}]")

    @property
    def F_PE(self) -> float:
        return 0.5 * (self.F_min + self.F_max)

    @property
    def Delta(self) -> float:
        return self.F_max - self.F_min

    @property
    def accept_interval(self) -> tuple[float, float]:
        eta = self.Delta / 4.0
        return self.F_PE - eta, self.F_PE + eta

    def statistic_window(self) -> "PEWindow":
        """Window with endpoints carried through the Werner statistic map."""
        lo, hi = werner_statistic([self.F_min, self.F_max])
        return PEWindow(float(lo), float(hi), self.infeasible)


def pe_sample(pair1: BellLabel, pair2: BellLabel) -> int:
    """1 iff X (x) X on ``pair1`` and Z (x) Z on ``pair2`` both read +1."""
    return int(pair1[0] == 0 and pair2[1] == 0)


def pe_samples(phase: np.ndarray, amp: np.ndarray) -> np.ndarray:
    """Vectorised :func:`pe_sample` over consecutive pairs of a label array."""
    phase = np.asarray(phase)
    amp = np.asarray(amp)
    if phase.size % 2:
        raise ParameterError("parameter estimation needs an even number of pairs")
    return ((phase[0::2] == 0) & (amp[1::2] == 0)).astype(np.uint8)


def estimate(samples) -> float:
    samples = np.asarray(samples)
    if samples.size == 0:
        raise ParameterError("no parameter-estimation samples")
    return float(samples.mean())


def decide(F_bar: float, window: PEWindow, mode: PEMode | str = PEMode.RAW) -> Decision:
    """Accept iff ``F_bar`` lies in the closed central half of the window.

    In calibrated mode the window is first mapped through the Werner
    statistic so the comparison happens on the scale of the raw samples.
    """
    mode = PEMode(mode)
    if window.infeasible:
        return Decision.ABORT
    w = window.statistic_window() if mode is PEMode.CALIBRATED else window
    lo, hi = w.accept_interval
    return Decision.CONTINUE if lo <= F_bar <= hi else Decision.ABORT


def log_misaccept_bound(Delta: float, kn: int) -> float:
    """ln of ``2 exp(-Delta^2 kn / 16)``."""
    return float(np.log(2.0) - Delta * Delta * kn / 16.0)


def noisy_window(q_minus: float, q_plus: float, alpha: float) -> PEWindow:
    iv = modified_pe_interval(q_minus, q_plus, alpha)
    high = iv.high if iv.high > iv.low else iv.low + 1e-12
    return PEWindow(iv.low, high, infeasible=iv.infeasible)


def window_for_noise(F_min: float, F_max: float, alpha: float) -> PEWindow:
    """Agreed fidelity window adjusted for resource noise of retention ``alpha``."""
    from .bell import fidelity_to_q

    if alpha == 1.0:
        return PEWindow(F_min, F_max)
    return noisy_window(fidelity_to_q(F_min), fidelity_to_q(F_max), alpha)


__all__ = [
    "Decision",
    "PEMode",
    "PEWindow",
    "decide",
    "estimate",
    "log_misaccept_bound",
    "noisy_window",
    "pe_sample",
    "pe_samples",
    "q_to_fidelity",
    "werner_statistic",
    "window_for_noise",
]
