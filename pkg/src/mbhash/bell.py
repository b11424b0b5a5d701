"""
Label algebra of Bell-diagonal two-qubit states.

A Bell state ``|B_ij>`` carries a phase bit ``i`` and an amplitude bit ``j``;
probability vectors are always ordered ``(p00, p01, p10, p11)``, i.e. index
``2 * phase + amplitude``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from ._validation import ParameterError, check_probability_vector, check_unit_interval

#: Werner fidelity threshold of noiseless hashing.
F_CRIT = 0.8107


class InvalidSymbolError(ValueError):
    pass


class BellLabel(NamedTuple):
    phase: int
    amplitude: int

    @property
    def index(self) -> int:
        return 2 * self.phase + self.amplitude

    @classmethod
    def from_index(cls, k: int) -> "BellLabel":
        return cls(k >> 1, k & 1)


ALL_LABELS = tuple(BellLabel.from_index(k) for k in range(4))


@dataclass(frozen=True)
class BellDiagonal:
    """Bell-diagonal state given by its four Bell-basis weights."""

    p: np.ndarray

    def __post_init__(self):
        arr = check_probability_vector(self.p, "p", size=4)
        arr.setflags(write=False)
        object.__setattr__(self, "p", arr)

    @property
    def fidelity(self) -> float:
        return float(self.p[0])

    def entropy(self) -> float:
        """Von Neumann entropy in bits."""
        nz = self.p[self.p > 0]
        return float(-(nz * np.log2(nz)).sum())

    def __eq__(self, other):
        if not isinstance(other, BellDiagonal):
            return NotImplemented
        return bool(np.array_equal(self.p, other.p))

    def __hash__(self):
        return hash(self.p.tobytes())

    def allclose(self, other: "BellDiagonal", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.p, other.p, rtol=0.0, atol=atol))


def bilateral_cnot(first: BellLabel, second: BellLabel) -> tuple[BellLabel, BellLabel]:
    """Bilateral CNOT with ``first`` as control pair and ``second`` as target.

    Phase bits flow from target to control, amplitude bits from control to
    target.
    """
    i1, j1 = first
    i2, j2 = second
    return BellLabel(i1 ^ i2, j1), BellLabel(i2, j1 ^ j2)


def select_bit(symbol: int, label: BellLabel) -> Optional[int]:
    """Bit a pair contributes to a parity round for hash symbol ``symbol``.

    0 bypasses the pair, 1 selects the amplitude bit, 2 the phase bit and 3
    their sum.
    """
    if symbol == 0:
        return None
    i, j = label
    if symbol == 1:
        return j
    if symbol == 2:
        return i
    if symbol == 3:
        return i ^ j
    raise InvalidSymbolError(f"hash symbol must be in 0..3, got {symbol!r}")


def depolarize(state: BellDiagonal, alpha: float) -> BellDiagonal:
    """Local depolarizing channel of retention ``alpha`` on one qubit of the pair."""
    alpha = check_unit_interval(alpha, "alpha")
    return BellDiagonal(alpha * state.p + (1.0 - alpha) / 4.0)


def werner(F: float) -> BellDiagonal:
    F = float(F)
    if not 0.25 <= F <= 1.0:
        raise ParameterError(f"Werner fidelity F={F!r} outside [1/4, 1]")
    r = (1.0 - F) / 3.0
    return BellDiagonal(np.array([F, r, r, r]))


def fidelity_to_q(F: float) -> float:
    F = float(F)
    if not 0.25 <= F <= 1.0:
        raise ParameterError(f"fidelity F={F!r} outside [1/4, 1]")
    return (4.0 * F - 1.0) / 3.0


def q_to_fidelity(q: float) -> float:
    q = check_unit_interval(q, "q")
    return (3.0 * q + 1.0) / 4.0


def twirl_to_werner(state: BellDiagonal) -> BellDiagonal:
    """Deterministic twirl: keep ``p00`` and spread the rest evenly."""
    F = state.fidelity
    r = (1.0 - F) / 3.0
    return BellDiagonal(np.array([F, r, r, r]))


def werner_entropy(F: float) -> float:
    """Entropy in bits of the Werner state of fidelity ``F``, ``F`` in (1/4, 1]."""
    F = float(F)
    if not 0.25 <= F <= 1.0:
        raise ParameterError(f"F={F!r} outside [1/4, 1]")
    if F == 0.25:
        return 2.0
    rest = 1.0 - F
    tail = 0.0 if rest == 0.0 else rest * (math.log2(rest) - math.log2(3.0))
    # log1p keeps F log2 F accurate as F -> 1
    head = 0.0 if F == 1.0 else F * math.log1p(F - 1.0) / math.log(2.0)
    return -(head + tail)
