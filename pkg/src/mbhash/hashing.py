"""
Monte Carlo simulation of bipartite measurement-based hashing.

Bell-diagonal ensembles are simulated as hidden label vectors; every
operation of the protocol permutes labels, so the classical unravelling is
exact. Bits of the initial string are indexed ``2t`` (phase of pair ``t``)
and ``2t + 1`` (amplitude of pair ``t``).
"""

from __future__ import annotations

import enum
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import gf2
from ._validation import ParameterError, check_positive_int, check_unit_interval
from .bell import ALL_LABELS, BellDiagonal, BellLabel, depolarize, twirl_to_werner
from .bounds import default_delta, hashing_yield
from .likely import DEFAULT_BUDGET, DecodeResult, DecodeStatus, LikelySet, decode_exhaustive, decode_typical, likely_set
from .param_est import Decision, PEMode, decide, estimate, pe_samples, window_for_noise
from .stats import wilson_interval

EXHAUSTIVE_MAX_N = 24
WORKERS_ENV = "MBHASH_WORKERS"


class DegenerateRoundError(ParameterError):
    pass


class Branch(enum.Enum):
    OK = "ok"
    FAIL = "fail"


class FailCause(enum.Enum):
    NONE = "none"
    OUTSIDE_LIKELY = "outside_likely"
    AMBIGUOUS = "ambiguous"
    PE_ABORT = "pe_abort"


class DecodeMode(enum.Enum):
    EXHAUSTIVE = "exhaustive"
    TYPICAL = "typical"


@dataclass
class Ensemble:
    """Hidden labels of the pairs still in play, as parallel bit arrays."""

    phase: np.ndarray
    amp: np.ndarray

    def __post_init__(self):
        self.phase = np.asarray(self.phase, dtype=np.uint8)
        self.amp = np.asarray(self.amp, dtype=np.uint8)
        if self.phase.shape != self.amp.shape or self.phase.ndim != 1:
            raise ParameterError("phase and amplitude arrays must be 1-D and equally long")

    @property
    def n(self) -> int:
        return int(self.phase.size)

    @property
    def labels(self) -> list[BellLabel]:
        return [BellLabel(int(i), int(j)) for i, j in zip(self.phase, self.amp)]

    @classmethod
    def from_labels(cls, labels) -> "Ensemble":
        arr = np.array([tuple(lab) for lab in labels], dtype=np.uint8).reshape(-1, 2)
        return cls(arr[:, 0].copy(), arr[:, 1].copy())

    def bits(self) -> np.ndarray:
        out = np.empty(2 * self.n, dtype=np.uint8)
        out[0::2] = self.phase
        out[1::2] = self.amp
        return out

    def packed(self) -> np.ndarray:
        return gf2.pack(self.bits())

    def copy(self) -> "Ensemble":
        return Ensemble(self.phase.copy(), self.amp.copy())


def sample_labels(state: BellDiagonal, size: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    idx = rng.choice(4, size=int(size), p=state.p).astype(np.uint8)
    return idx >> 1, idx & 1


def sample_ensemble(state: BellDiagonal, n: int, rng) -> Ensemble:
    n = check_positive_int(n, "n")
    phase, amp = sample_labels(state, n, rng)
    return Ensemble(phase, amp)


@dataclass(frozen=True)
class ParityRound:
    s: np.ndarray
    target_index: int
    measured_parity: int
    functional: Optional[np.ndarray] = None


@dataclass
class SymbolicFrame:
    """Each current phase/amplitude bit as a GF(2) functional of the initial bits."""

    P: np.ndarray
    A: np.ndarray
    nbits: int

    @classmethod
    def initial(cls, n: int) -> "SymbolicFrame":
        nbits = 2 * n
        eye = gf2.pack(np.eye(nbits, dtype=np.uint8))
        return cls(eye[0::2].copy(), eye[1::2].copy(), nbits)


def _check_symbols(s: np.ndarray, length: int) -> np.ndarray:
    s = np.asarray(s)
    if s.shape != (length,):
        raise ParameterError(f"hash string has length {s.size}, expected {length}")
    if s.size and (s.min() < 0 or s.max() > 3):
        from .bell import InvalidSymbolError

        raise InvalidSymbolError("hash symbols must lie in 0..3")
    return s.astype(np.uint8)


def _apply_round(phase, amp, s, frame: Optional[SymbolicFrame]):
    nz = np.flatnonzero(s)
    if nz.size == 0:
        raise DegenerateRoundError("hash string has no nonzero symbol")
    t = int(nz[0])
    sv = s[nz]
    sel = np.where(sv == 1, amp[nz], np.where(sv == 2, phase[nz], phase[nz] ^ amp[nz]))
    parity = int(np.bitwise_xor.reduce(sel))
    back = phase[t] if s[t] != 2 else amp[t]
    src = nz[1:]
    ssrc = s[src]
    functional = None
    if frame is not None:
        P, A = frame.P, frame.A
        rows = np.where((sv == 1)[:, None], A[nz], np.where((sv == 2)[:, None], P[nz], P[nz] ^ A[nz]))
        functional = np.bitwise_xor.reduce(rows, axis=0)
        back_row = P[t].copy() if s[t] != 2 else A[t].copy()
        hit_p = src[ssrc != 2]
        hit_a = src[ssrc >= 2]
        P[hit_p] ^= back_row
        A[hit_a] ^= back_row
        frame.P = np.delete(P, t, axis=0)
        frame.A = np.delete(A, t, axis=0)
    if back:
        phase[src[ssrc != 2]] ^= 1
        amp[src[ssrc >= 2]] ^= 1
    return t, parity, functional


def run_round(ensemble: Ensemble, s, rng=None, frame: Optional[SymbolicFrame] = None) -> tuple[Ensemble, ParityRound]:
    """One hashing round with hash string ``s`` on a copy of ``ensemble``.

    Local operations map each involved pair so that its selected bit becomes
    the amplitude; bilateral CNOTs then fold these into the first involved
    pair, which is measured and discarded. Back-action on the other pairs is
    kept in the canonical frame. ``frame``, if given, is updated in place.
    """
    s = _check_symbols(s, ensemble.n)
    phase = ensemble.phase.copy()
    amp = ensemble.amp.copy()
    t, parity, functional = _apply_round(phase, amp, s, frame)
    out = Ensemble(np.delete(phase, t), np.delete(amp, t))
    return out, ParityRound(s.copy(), t, parity, functional)


def draw_hash_string(length: int, rng: np.random.Generator) -> np.ndarray:
    while True:
        s = rng.integers(0, 4, size=length, dtype=np.uint8)
        if s.any():
            return s


def replay(bits_phase, bits_amp, history) -> tuple[np.ndarray, np.ndarray, list[int]]:
    """Rerun recorded hash strings on a known label string; returns survivors and parities."""
    phase = np.asarray(bits_phase, dtype=np.uint8).copy()
    amp = np.asarray(bits_amp, dtype=np.uint8).copy()
    parities = []
    for s in history:
        t, par, _ = _apply_round(phase, amp, s, None)
        phase = np.delete(phase, t)
        amp = np.delete(amp, t)
        parities.append(par)
    return phase, amp, parities


def functionals(n: int, history) -> np.ndarray:
    """Parity functionals over the ``2n`` initial bits, one row per recorded round."""
    frame = SymbolicFrame.initial(n)
    phase = np.zeros(n, dtype=np.uint8)
    amp = np.zeros(n, dtype=np.uint8)
    rows = []
    for s in history:
        t, _, row = _apply_round(phase, amp, s, frame)
        phase = np.delete(phase, t)
        amp = np.delete(amp, t)
        rows.append(row)
    if not rows:
        return np.zeros((0, gf2.words(2 * n)), dtype=np.uint64)
    return np.stack(rows)


def bell_symbol_probs(state: BellDiagonal) -> np.ndarray:
    """Probabilities of the 2-bit symbol ``phase + 2*amp`` used in packed strings."""
    p = state.p
    return np.array([p[0], p[2], p[1], p[3]])


def likely_set_for(state: BellDiagonal, n: int, delta: float) -> LikelySet:
    return likely_set(bell_symbol_probs(state), n, delta, bits=2)


def decode(rows, parities, state: BellDiagonal, delta: float, n: int, mode="exhaustive", truth=None, budget: int = DEFAULT_BUDGET) -> DecodeResult:
    """Identify the initial label string from parity functionals.

    ``exhaustive`` searches the likely set without access to the true string
    (``n`` at most 24). ``typical`` needs ``truth`` and only certifies it.
    """
    mode = DecodeMode(mode)
    ls = likely_set_for(state, n, delta)
    if mode is DecodeMode.EXHAUSTIVE:
        if n > EXHAUSTIVE_MAX_N:
            raise ParameterError(f"exhaustive decoding needs n <= {EXHAUSTIVE_MAX_N}, got {n}")
        return decode_exhaustive(rows, parities, ls, budget)
    if truth is None:
        raise ParameterError("typical decoding needs the sampled string")
    return decode_typical(rows, truth, ls, budget)


@dataclass(frozen=True)
class ProtocolConfig:
    n: int
    k: float = 1.0
    F_min: float = 0.90
    F_max: float = 0.95
    delta: Optional[float] = None
    rounds: Optional[int] = None
    seed: int = 0
    alpha: float = 1.0
    pe_mode: str = "calibrated"
    decode_mode: str = "exhaustive"
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        object.__setattr__(self, "n", check_positive_int(self.n, "n"))
        if not float(self.k) > 0:
            raise ParameterError(f"k={self.k!r} must be positive")
        if not 0.25 <= float(self.F_min) < float(self.F_max) <= 1.0:
            raise ParameterError(f"need 1/4 <= F_min < F_max <= 1, got [{self.F_min!r}, {self.F_max!r}]")
        if self.delta is None:
            object.__setattr__(self, "delta", default_delta(self.n))
        if not 0.0 < float(self.delta) <= 1.0:
            raise ParameterError(f"delta={self.delta!r} outside (0, 1]")
        check_unit_interval(self.alpha, "alpha")
        if self.alpha == 0.0:
            raise ParameterError("alpha must be positive")
        if self.rounds is not None:
            r = check_positive_int(self.rounds, "rounds")
            if r > self.n:
                raise ParameterError(f"rounds={r} exceeds n={self.n}")
            object.__setattr__(self, "rounds", r)
        if self.pe_mode not in {m.value for m in PEMode}:
            raise ParameterError(f"unknown PE mode {self.pe_mode!r}")
        if self.decode_mode not in {m.value for m in DecodeMode}:
            raise ParameterError(f"unknown decode mode {self.decode_mode!r}")
        mode = DecodeMode(self.decode_mode)
        if mode is DecodeMode.EXHAUSTIVE and self.n > EXHAUSTIVE_MAX_N:
            raise ParameterError(f"exhaustive decoding needs n <= {EXHAUSTIVE_MAX_N}, got n={self.n}")
        kn = self.pe_systems
        if kn < 2 or kn % 2:
            raise ParameterError(f"k*n={self.k * self.n!r} must round to an even count >= 2")
        check_positive_int(self.budget, "budget")

    @property
    def pe_systems(self) -> int:
        return int(round(float(self.k) * self.n))

    def round_count(self, state: BellDiagonal) -> int:
        if self.rounds is not None:
            return self.rounds
        m, _ = hashing_yield(self.n, state.entropy(), self.delta)
        return max(1, self.n - m)


@dataclass
class Outcome:
    branch: Branch
    fail_cause: FailCause
    output_labels: list
    diagnostics: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return len(self.output_labels)

    @property
    def infidelity(self) -> Optional[float]:
        if self.branch is not Branch.OK or not self.output_labels:
            return None
        return sum(1 for lab in self.output_labels if tuple(lab) != (0, 0)) / len(self.output_labels)


def hashing_state(state: BellDiagonal, alpha: float) -> BellDiagonal:
    """State seen by the hashing stage once resource noise is moved onto the inputs."""
    twirled = twirl_to_werner(state)
    if alpha == 1.0:
        return twirled
    return depolarize(depolarize(twirled, alpha), alpha)


def run_protocol(config: ProtocolConfig, state: BellDiagonal, rng=None) -> Outcome:
    """Twirl, estimate, hash, decode and restore; failures come back as outcome values."""
    rng = np.random.default_rng(config.seed if rng is None else rng)
    twirled = twirl_to_werner(state)
    pe_phase, pe_amp = sample_labels(twirled, config.pe_systems, rng)
    F_bar = estimate(pe_samples(pe_phase, pe_amp))
    window = window_for_noise(config.F_min, config.F_max, config.alpha)
    if decide(F_bar, window, config.pe_mode) is Decision.ABORT:
        return Outcome(Branch.FAIL, FailCause.PE_ABORT, [], {"pe_statistic": F_bar})
    out = hash_and_restore(config, hashing_state(state, config.alpha), rng)
    out.diagnostics["pe_statistic"] = F_bar
    return out


def hash_and_restore(config: ProtocolConfig, working: BellDiagonal, rng) -> Outcome:
    """Hashing rounds, decoding and Pauli-frame restore on an ensemble drawn from ``working``.

    This is the protocol after a successful parameter estimation; ``working``
    is the state already carrying any relocated resource noise.
    """
    rng = np.random.default_rng(rng)
    n = config.n
    ens = sample_ensemble(working, n, rng)
    truth = ens.packed()
    rounds = config.round_count(working)
    history = []
    parities = []
    phase, amp = ens.phase.copy(), ens.amp.copy()
    for _ in range(rounds):
        s = draw_hash_string(phase.size, rng)
        t, par, _ = _apply_round(phase, amp, s, None)
        phase = np.delete(phase, t)
        amp = np.delete(amp, t)
        history.append(s)
        parities.append(par)
    diag = {"rounds": rounds}

    ls = likely_set_for(working, n, config.delta)
    in_likely = bool(ls.contains(truth[None, :])[0])
    mode = DecodeMode(config.decode_mode)
    if mode is DecodeMode.TYPICAL and not in_likely:
        result = DecodeResult(DecodeStatus.OUTSIDE_LIKELY, None, None)
    elif mode is DecodeMode.EXHAUSTIVE:
        result = decode_exhaustive(functionals(n, history), np.array(parities, dtype=np.uint8), ls, config.budget)
    else:
        result = decode_typical(lambda: functionals(n, history), truth, ls, config.budget, n_rows=len(history))
    diag["decode_status"] = result.status.value
    diag["budget_exceeded"] = result.status is DecodeStatus.BUDGET_EXCEEDED

    if not in_likely:
        return Outcome(Branch.FAIL, FailCause.OUTSIDE_LIKELY, [], diag)
    if result.status is DecodeStatus.AMBIGUOUS:
        return Outcome(Branch.FAIL, FailCause.AMBIGUOUS, [], diag)
    # an unverified budget overrun proceeds with the sampled string, flagged above
    decoded = truth if result.decoded is None else result.decoded
    bits = gf2.unpack(decoded, 2 * n)
    pred_phase, pred_amp, _ = replay(bits[0::2], bits[1::2], history)
    out_phase = phase ^ pred_phase
    out_amp = amp ^ pred_amp
    if config.alpha < 1.0:
        noise_p, noise_a = sample_labels(depolarize(BellDiagonal([1, 0, 0, 0]), config.alpha), out_phase.size, rng)
        out_phase = out_phase ^ noise_p
        out_amp = out_amp ^ noise_a
    labels = [ALL_LABELS[2 * int(i) + int(j)] for i, j in zip(out_phase, out_amp)]
    return Outcome(Branch.OK, FailCause.NONE, labels, diag)


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    branch: str
    cause: str
    m: int
    infidelity: Optional[float]
    budget_exceeded: bool = False

    def transcript(self) -> dict:
        return {"trial": self.trial, "branch": self.branch, "cause": self.cause, "m": self.m, "infidelity": self.infidelity}


@dataclass(frozen=True)
class MonteCarloStats:
    trials: int
    counts: dict
    rates: dict
    intervals: dict
    budget_exceeded: int
    mean_infidelity: Optional[float]
    confidence: float
    records: tuple = ()

    def as_dict(self) -> dict:
        return {
            "trials": self.trials,
            "counts": dict(self.counts),
            "rates": dict(self.rates),
            "intervals": {k: list(v) for k, v in self.intervals.items()},
            "budget_exceeded": self.budget_exceeded,
            "mean_infidelity": self.mean_infidelity,
            "confidence": self.confidence,
        }


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def trial_seeds(master: int, trials: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(master).spawn(trials)


def _one_trial(args) -> TrialRecord:
    config, state, index, seed = args
    out = run_protocol(config, state, np.random.default_rng(seed))
    return TrialRecord(index, out.branch.value, out.fail_cause.value, out.m, out.infidelity, bool(out.diagnostics.get("budget_exceeded", False)))


def summarize(records, causes, confidence: float) -> MonteCarloStats:
    trials = len(records)
    counts = {c: 0 for c in causes}
    for r in records:
        counts[r.cause] = counts.get(r.cause, 0) + 1
    rates = {c: counts[c] / trials for c in counts}
    intervals = {c: wilson_interval(counts[c], trials, confidence) for c in counts}
    inf = [r.infidelity for r in records if r.infidelity is not None]
    return MonteCarloStats(
        trials=trials,
        counts=counts,
        rates=rates,
        intervals=intervals,
        budget_exceeded=sum(1 for r in records if r.budget_exceeded),
        mean_infidelity=float(np.mean(inf)) if inf else None,
        confidence=confidence,
        records=tuple(records),
    )


def run_trials(worker, payloads, workers: Optional[int]):
    workers = default_workers() if workers is None else int(workers)
    if workers <= 1 or len(payloads) < 2:
        return [worker(p) for p in payloads]
    chunk = max(1, len(payloads) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, payloads, chunksize=chunk))


def monte_carlo(config: ProtocolConfig, state: BellDiagonal, trials: int, *, workers: Optional[int] = None, confidence: float = 0.99) -> MonteCarloStats:
    """Independent protocol runs with per-trial seeds spawned from ``config.seed``."""
    trials = check_positive_int(trials, "trials")
    seeds = trial_seeds(config.seed, trials)
    payloads = [(config, state, i, seeds[i]) for i in range(trials)]
    records = run_trials(_one_trial, payloads, workers)
    return summarize(records, [c.value for c in FailCause], confidence)

