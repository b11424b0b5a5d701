"""
Finite-size confidentiality bounds for bipartite hashing, evaluated in log space.

All ``log_*`` quantities are natural logarithms. Entropies and the Bennett
ingredients ``a``, ``V`` are in bits, while the exponent ``x1`` uses the
natural logarithm inside Bennett's ``h(u) = (1+u) ln(1+u) - u``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from ._validation import ParameterError, check_positive_int
from .bell import F_CRIT, werner_entropy

LN2 = math.log(2.0)


def _check_hashing_fidelity(F: float, name: str = "F") -> float:
    F = float(F)
    if not F_CRIT < F < 1.0:
        raise ParameterError(f"{name}={F!r} outside ({F_CRIT}, 1)")
    return F


def a_of(F: float) -> float:
    """Almost-sure bound on the centred surprisal ``-log2 p - S(F)``."""
    F = _check_hashing_fidelity(F)
    return abs(math.log2((1.0 - F) / 3.0)) + werner_entropy(F)


def V_of(F: float) -> float:
    """Variance of the surprisal of a Werner-state label, in bits squared."""
    F = _check_hashing_fidelity(F)
    s = werner_entropy(F)
    lf = math.log1p(F - 1.0) / LN2
    lr = math.log2((1.0 - F) / 3.0)
    return F * lf * lf + (1.0 - F) * lr * lr - s * s


def g_of(F: float) -> float:
    return V_of(F) / a_of(F)


def default_delta(n: int, multiparty: bool = False) -> float:
    """Likely-subspace width: ``n**-1/5`` bipartite, ``n**-1/4`` multiparty."""
    return float(n) ** (-0.25 if multiparty else -0.2)


def _bennett_bracket(g: float, delta: float) -> float:
    # (g + d) ln(1 + d/g) - d, series form once d/g is tiny to avoid cancellation
    u = delta / g
    if u < 1e-4:
        return g * (u * u / 2.0 - u ** 3 / 6.0 + u ** 4 / 12.0)
    return (g + delta) * math.log1p(u) - delta


def x1(delta: float, F_min: float, F_max: float) -> float:
    """Bennett exponent per system for the worst fidelity in the window."""
    delta = float(delta)
    if delta < 0.0:
        raise ParameterError(f"delta={delta!r} must be non-negative")
    a_max = a_of(F_max)
    g_max = g_of(F_min)
    if delta == 0.0:
        return 0.0
    return _bennett_bracket(g_max, delta) / a_max


@dataclass(frozen=True)
class BoundInputs:
    n: int
    k: float = 1.0
    F_min: float = 0.90
    F_max: float = 0.95
    delta: Optional[float] = None
    d: int = 4

    def __post_init__(self):
        object.__setattr__(self, "n", check_positive_int(self.n, "n"))
        if not float(self.k) > 0.0:
            raise ParameterError(f"k={self.k!r} must be positive")
        if not F_CRIT < float(self.F_min) < float(self.F_max) <= 1.0:
            raise ParameterError(
                f"need {F_CRIT} < F_min < F_max <= 1, got F_min={self.F_min!r}, F_max={self.F_max!r}"
            )
        if self.delta is None:
            object.__setattr__(self, "delta", default_delta(self.n))
        if not 0.0 < float(self.delta) <= 1.0:
            raise ParameterError(f"delta={self.delta!r} outside (0, 1]")
        object.__setattr__(self, "d", check_positive_int(self.d, "d", minimum=2))


@dataclass(frozen=True)
class BoundReport:
    a_max: float
    g_max: float
    V_at_Fmin: float
    x1: float
    log_p1: float
    log_p2: float
    log_p3: float
    log_iid_bound: float
    log_postselect_factor: float
    log_diamond_bound: float
    m_yield: int
    zero_yield: bool

    def as_dict(self) -> dict:
        return asdict(self)


def log_p1(n, delta, F_min, F_max) -> float:
    """ln of the probability bound for leaving the likely subspace."""
    return LN2 - float(n) * x1(delta, F_min, F_max)


def log_p2(n, delta) -> float:
    """ln of the bound ``2**(-n delta)`` on an ambiguous parity record."""
    return -float(n) * float(delta) * LN2


def log_p3(n, k, F_min, F_max) -> float:
    """ln of the Hoeffding bound on accepting a state outside the window."""
    width = float(F_max) - float(F_min)
    return LN2 - width * width * float(k) * float(n) / 16.0


def hashing_yield(n: int, entropy: float, delta: float) -> tuple[int, bool]:
    """``floor(n (1 - S - 2 delta))`` and whether the yield is non-positive."""
    raw = float(n) * (1.0 - entropy - 2.0 * delta)
    # absorb rounding so exact products such as 3999.9999999 floor to 4000
    m = math.floor(raw + 1e-9 * max(1.0, abs(raw)))
    if m <= 0:
        return 0, True
    return int(m), False


def exp_decay_floor(n, F_min, F_max) -> float:
    """Lower bound ``n**(3/5) / (2 g_max + 1)`` on ``n * a_max * x1(n**-1/5)``."""
    n = check_positive_int(n, "n")
    return float(n) ** 0.6 / (2.0 * g_of(F_min) + 1.0)


def postselect_factor_log(n, k, d, exact: bool = False) -> float:
    """ln of the post-selection factor for ``N = n + kn`` systems of dimension ``d``.

    ``exact`` gives ``ln binom(N + d^2 - 1, d^2 - 1)``, otherwise the power bound
    ``(d^2 - 1) ln(N + 1)``.
    """
    d = check_positive_int(d, "d", minimum=2)
    total = float(n) + float(k) * float(n)
    r = d * d - 1
    if not exact:
        return r * math.log(total + 1.0)
    if not float(total).is_integer():
        raise ParameterError(f"exact binomial needs integral n + kn, got {total!r}")
    N = int(total)
    if N + r <= 5000:
        return math.log(math.comb(N + r, r))
    return math.lgamma(N + r + 1.0) - math.lgamma(N + 1.0) - math.lgamma(r + 1.0)


def _logsumexp(values) -> float:
    arr = np.asarray(values, dtype=np.float64)
    top = float(np.max(arr))
    if top == -math.inf:
        return -math.inf
    return top + math.log(float(np.sum(np.exp(arr - top))))


def iid_bound(inputs: BoundInputs, exact: bool = False) -> BoundReport:
    """Evaluate the i.i.d. trace-distance bound and everything it depends on.

    The returned report also carries the post-selection factor and the
    resulting diamond-norm bound, so one call yields the whole table row.
    """
    n, k, lo, hi, delta = inputs.n, inputs.k, inputs.F_min, inputs.F_max, inputs.delta
    a_max = a_of(hi)
    g_max = g_of(lo)
    x = x1(delta, lo, hi)
    lp1 = LN2 - n * x
    lp2 = log_p2(n, delta)
    lp3 = log_p3(n, k, lo, hi)
    log_iid = LN2 + _logsumexp([lp1, lp2, lp3])
    log_post = postselect_factor_log(n, k, inputs.d, exact=exact)
    m, zero = hashing_yield(n, werner_entropy(lo), delta)
    return BoundReport(
        a_max=a_max,
        g_max=g_max,
        V_at_Fmin=V_of(lo),
        x1=x,
        log_p1=lp1,
        log_p2=lp2,
        log_p3=lp3,
        log_iid_bound=log_iid,
        log_postselect_factor=log_post,
        log_diamond_bound=math.log(4.0) + log_post + 0.5 * log_iid,
        m_yield=m,
        zero_yield=zero,
    )


def diamond_bound_log(inputs: BoundInputs, exact: bool = False) -> float:
    """ln of ``4 g sqrt(max_sigma ||(E - F)(sigma^{n+kn})||_1)``."""
    return iid_bound(inputs, exact=exact).log_diamond_bound


def bipartite_closed_form_log(n, k, F_min, F_max) -> float:
    """ln of the explicit d = 4 diamond bound with ``delta = n**-1/5``.

    Written out term by term as ``4 sqrt(2) (n+kn+1)^15 [ ... ]^(1/2)``; kept
    separate from :func:`diamond_bound_log` so the two can cross-check.
    """
    n = float(n)
    k = float(k)
    a_max = a_of(F_max)
    g_max = g_of(F_min)
    d = n ** -0.2
    xb = ((g_max + d) * math.log(1.0 + d / g_max) - d) / a_max
    terms = [
        math.log(2.0) - n * xb,
        -(n ** 0.8) * math.log(2.0),
        math.log(2.0) - (F_max - F_min) ** 2 * k * n / 16.0,
    ]
    bracket = float(np.logaddexp.reduce(terms))
    return math.log(4.0 * math.sqrt(2.0)) + 15.0 * math.log(n + k * n + 1.0) + 0.5 * bracket


def local_to_global(eps: float) -> float:
    """Distance bound on any purification given a local distance ``eps``."""
    if eps < 0:
        raise ParameterError(f"eps={eps!r} must be non-negative")
    return 4.0 * math.sqrt(eps)


def leakage_bound(eps: float) -> float:
    """Confidentiality level when the noise transcript leaks to the eavesdropper."""
    if eps < 0:
        raise ParameterError(f"eps={eps!r} must be non-negative")
    return 2.0 * math.sqrt(eps)


def first_n_below(log_bound_of_n, n_max: int, n_min: int = 1) -> Optional[int]:
    """Smallest ``n`` in ``[n_min, n_max]`` with ``log_bound_of_n(n) < 0``.

    Scans a log grid and refines by bisection, assuming the bound stays below
    one once it gets there.
    """
    grid = np.unique(np.round(np.logspace(math.log10(n_min), math.log10(n_max), 400)).astype(np.int64))
    hit = None
    prev = n_min
    for n in grid:
        if log_bound_of_n(int(n)) < 0.0:
            hit = int(n)
            break
        prev = int(n)
    if hit is None:
        return None
    lo, hi = prev, hit
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if log_bound_of_n(mid) < 0.0:
            hi = mid
        else:
            lo = mid
    return hi if log_bound_of_n(lo) >= 0.0 else lo
