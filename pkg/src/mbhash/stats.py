"""Binomial confidence intervals for Monte Carlo rates."""

from __future__ import annotations

from scipy.stats import binomtest


def wilson_interval(successes: int, trials: int, confidence: float = 0.99) -> tuple[float, float]:
    if trials <= 0:
        raise ValueError("trials must be positive")
    ci = binomtest(int(successes), int(trials)).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def wilson_upper(successes: int, trials: int, confidence: float = 0.99) -> float:
    """One-sided upper limit at ``confidence`` (two-sided interval at ``2c - 1``)."""
    return wilson_interval(successes, trials, 2.0 * confidence - 1.0)[1]
