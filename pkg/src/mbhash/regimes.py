"""
Privacy and purification regimes of noisy measurement-based hashing.

A point ``(alpha, q)`` pairs the retention ``alpha`` of the local depolarizing
noise on the resource states with the retention ``q`` of the (twirled)
initial Werner states.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import ParameterError, check_unit_interval
from .bell import F_CRIT, fidelity_to_q

Q_CRIT = fidelity_to_q(F_CRIT)


class SingularNoiseError(ParameterError):
    pass


class Regime(enum.Enum):
    NONE = "none"
    PRIVACY_ONLY = "privacy"
    PRIVACY_AND_PURIFICATION = "both"

    @property
    def private(self) -> bool:
        return self is not Regime.NONE


@dataclass(frozen=True)
class RegimePoint:
    alpha: float
    q: float
    classification: Regime


def classify(alpha: float, q: float, q_crit: float = Q_CRIT) -> Regime:
    """Asymptotic regime of ``(alpha, q)``; boundaries fall to the weaker side."""
    alpha = check_unit_interval(alpha, "alpha")
    q = check_unit_interval(q, "q")
    a2 = alpha * alpha
    if not a2 * q > q_crit:
        return Regime.NONE
    if a2 > q:
        return Regime.PRIVACY_AND_PURIFICATION
    return Regime.PRIVACY_ONLY


def finite_size_purifies(alpha: float, q_out: float, q_in: float) -> bool:
    """Finite-size purification test ``alpha^2 q_out > q_in``.

    ``q_out`` has no closed form and must come from simulated output fidelities.
    """
    alpha = check_unit_interval(alpha, "alpha")
    return alpha * alpha * check_unit_interval(q_out, "q_out") > check_unit_interval(q_in, "q_in")


def relocate_noise(q: float, alpha: float) -> float:
    """Effective initial-state retention once resource input noise is moved onto it."""
    q = check_unit_interval(q, "q")
    alpha = check_unit_interval(alpha, "alpha")
    return alpha * alpha * q


class ModifiedInterval(NamedTuple):
    low: float
    high: float
    raw_high: float
    clamped: bool
    infeasible: bool


def modified_pe_interval(q_minus: float, q_plus: float, alpha: float) -> ModifiedInterval:
    """Fidelity window that accepts exactly when ``alpha^2 q`` lies in ``[q_minus, q_plus]``.

    The upper end is clamped to 1; ``infeasible`` is set when even the lower
    end exceeds 1.
    """
    q_minus = check_unit_interval(q_minus, "q_minus")
    q_plus = check_unit_interval(q_plus, "q_plus")
    alpha = check_unit_interval(alpha, "alpha")
    if not 0.0 < q_minus < q_plus:
        raise ParameterError(f"need 0 < q_minus < q_plus, got {q_minus!r}, {q_plus!r}")
    if alpha == 0.0:
        raise SingularNoiseError("alpha = 0 leaves no information in the initial states")
    a2 = alpha * alpha
    low = (3.0 * q_minus + a2) / (4.0 * a2)
    raw_high = (3.0 * q_plus + a2) / (4.0 * a2)
    return ModifiedInterval(
        low=low,
        high=min(raw_high, 1.0),
        raw_high=raw_high,
        clamped=raw_high > 1.0,
        infeasible=low > 1.0,
    )


def regime_map(alpha_grid: Iterable[float], q_grid: Iterable[float], q_crit: float = Q_CRIT) -> list[RegimePoint]:
    """Classify every grid point, alpha-major (rows are alpha values)."""
    alphas = [float(a) for a in alpha_grid]
    qs = [float(q) for q in q_grid]
    return [RegimePoint(a, q, classify(a, q, q_crit)) for a in alphas for q in qs]


def regime_map_csv(points: Sequence[RegimePoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["alpha", "q", "class"])
    for pt in points:
        writer.writerow([repr(pt.alpha), repr(pt.q), pt.classification.value])
    return buf.getvalue()


def grid(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive arithmetic grid, robust to floating-point step accumulation."""
    if step <= 0:
        raise ParameterError(f"grid step must be positive, got {step!r}")
    if stop < start:
        return np.array([], dtype=np.float64)
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(count), 12)


class RegimeClassifier(ClassifierMixin, BaseEstimator):
    """Estimator wrapper around :func:`classify` for ``X`` columns ``[alpha, q]``.

    Nothing is learned; ``fit`` only validates input and records the labels,
    so the classifier slots into scikit-learn pipelines and grid tooling.
    """

    def __init__(self, q_crit: float = Q_CRIT):
        self.q_crit = q_crit

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != 2:
            raise ParameterError(f"expected 2 columns [alpha, q], got {X.shape[1]}")
        self.classes_ = np.array([r.value for r in Regime])
        self.n_features_in_ = 2
        return self

    def predict(self, X):
        check_is_fitted(self, "classes_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ParameterError(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        return np.array([classify(a, q, self.q_crit).value for a, q in X])
