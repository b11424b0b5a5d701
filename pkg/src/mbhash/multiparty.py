"""
Monte Carlo simulation of multiparty hashing on two-colorable graph states.

Copies are rows of a ``(copies, N)`` bit matrix of hidden ``kappa`` labels.
Subprotocol P1 folds a random subset into its lowest member with ``U1`` and
reads that member's ``mu`` with ``M1``; P2 does the same for ``nu`` with
``U2``/``M2``. Initial bit ``copy * N + vertex`` indexes the symbolic rows.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import gf2
from ._validation import ParameterError, check_positive_int
from .bounds import LN2, _logsumexp, default_delta
from .graph import (
    GraphDiagonal,
    GraphLabel,
    TwoColorableGraph,
    m1_readout,
    m2_readout,
    marginals,
    max_entropies,
    mix_identity,
    multiparty_yield,
)
from .hashing import Branch, FailCause, run_trials, trial_seeds
from .likely import DEFAULT_BUDGET, DecodeResult, DecodeStatus, decode_exhaustive, decode_typical, likely_set
from .param_est import Decision
from .stats import wilson_interval

EXHAUSTIVE_MAX_N = 24


class Subprotocol(enum.Enum):
    P1 = 1
    P2 = 2


@dataclass(frozen=True)
class SubprotocolRound:
    which: Subprotocol
    subset: tuple
    target: int
    revealed: tuple
    functionals: Optional[np.ndarray] = None


@dataclass
class MultiFrame:
    """Symbolic rows, shape ``(copies, N, words)``, over the ``N * n`` initial bits."""

    rows: np.ndarray
    nbits: int

    @classmethod
    def initial(cls, n: int, n_vertices: int) -> "MultiFrame":
        nbits = n * n_vertices
        eye = gf2.pack(np.eye(nbits, dtype=np.uint8))
        return cls(eye.reshape(n, n_vertices, -1).copy(), nbits)


def _fold(kappa: np.ndarray, graph: TwoColorableGraph, which: Subprotocol, subset, target: int):
    acc = np.asarray(graph.a_vertices if which is Subprotocol.P1 else graph.b_vertices, dtype=np.intp)
    back = np.asarray(graph.b_vertices if which is Subprotocol.P1 else graph.a_vertices, dtype=np.intp)
    sources = np.array([i for i in subset if i != target], dtype=np.intp)
    if sources.size:
        kappa[target, acc] ^= np.bitwise_xor.reduce(kappa[np.ix_(sources, acc)], axis=0)
        kappa[np.ix_(sources, back)] ^= kappa[target, back][None, :]
    return acc, back, sources


def run_subround(kappa, graph: TwoColorableGraph, which, subset, target=None, rng=None, frame: Optional[MultiFrame] = None):
    """Fold ``subset`` into ``target`` and read the target out; returns survivors and the round record."""
    which = Subprotocol(which)
    subset = tuple(sorted(int(i) for i in subset))
    if not subset:
        raise ParameterError("subset must be non-empty")
    target = subset[0] if target is None else int(target)
    if target not in subset:
        raise ParameterError("target must belong to the subset")
    kappa = np.array(kappa, dtype=np.uint8, copy=True)
    acc, back, sources = _fold(kappa, graph, which, subset, target)
    functionals = None
    if frame is not None:
        rows = frame.rows
        if sources.size:
            rows[target, acc] ^= np.bitwise_xor.reduce(rows[np.ix_(sources, acc)], axis=0)
            rows[np.ix_(sources, back)] ^= rows[target, back][None, :, :]
        functionals = rows[target, acc].copy()
        frame.rows = np.delete(rows, target, axis=0)
    label = GraphLabel.from_kappa(graph, kappa[target])
    readout = (m1_readout if which is Subprotocol.P1 else m2_readout)(label, graph, rng)
    survivors = np.delete(kappa, target, axis=0)
    return survivors, SubprotocolRound(which, subset, target, readout.revealed, functionals)


def draw_subset(size: int, rng: np.random.Generator) -> tuple:
    while True:
        pick = np.flatnonzero(rng.random(size) < 0.5)
        if pick.size:
            return tuple(int(i) for i in pick)


def provision_rounds(log2_likely_size: float, n: int, delta: float) -> int:
    """Rounds needed to push the spurious-match rate of a component below ``2**(-n delta)``."""
    return max(1, math.ceil(log2_likely_size + n * delta))


def windows_around(lam: GraphDiagonal, eta: float) -> np.ndarray:
    flat = lam.flat
    return np.stack([np.clip(flat - eta, 0.0, 1.0), np.clip(flat + eta, 0.0, 1.0)], axis=1)


def sample_kappa(lam: GraphDiagonal, count: int, rng) -> np.ndarray:
    nv = lam.n_vertices
    idx = rng.choice(lam.flat.size, size=int(count), p=lam.flat)
    shifts = np.arange(nv - 1, -1, -1)
    return ((idx[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def estimate_lambda(samples: np.ndarray) -> np.ndarray:
    samples = np.asarray(samples, dtype=np.int64)
    if samples.ndim != 2 or samples.shape[0] == 0:
        raise ParameterError("need a non-empty (samples, N) array")
    nv = samples.shape[1]
    idx = samples @ (1 << np.arange(nv - 1, -1, -1))
    return np.bincount(idx, minlength=2 ** nv) / samples.shape[0]


def multiparty_pe(samples, graph: TwoColorableGraph, windows) -> tuple[Decision, np.ndarray]:
    """Accept iff every estimated coefficient lies in its closed window."""
    windows = np.asarray(windows, dtype=np.float64)
    if windows.shape != (2 ** graph.n_vertices, 2):
        raise ParameterError(f"windows must have shape ({2 ** graph.n_vertices}, 2), got {windows.shape}")
    est = estimate_lambda(samples)
    if est.size != windows.shape[0]:
        raise ParameterError("samples do not match the graph size")
    inside = (est >= windows[:, 0]) & (est <= windows[:, 1])
    return (Decision.CONTINUE if inside.all() else Decision.ABORT), est


def log_pe_misaccept(n_vertices: int, eta: float, kn: float) -> float:
    """ln of the union bound ``2**N * 2 exp(-2 eta^2 kn)``."""
    return n_vertices * LN2 + LN2 - 2.0 * eta * eta * float(kn)


def default_c_prime(graph: TwoColorableGraph, windows, eps_mix: float = 1e-3) -> float:
    """``1 - log2 p_min`` with ``p_min`` the smallest marginal weight any windowed state allows."""
    windows = np.asarray(windows, dtype=np.float64)
    nv = graph.n_vertices
    kappas = (np.arange(2 ** nv)[:, None] >> np.arange(nv - 1, -1, -1)[None, :]) & 1
    p_min = 1.0
    for v in range(nv):
        for bit in (0, 1):
            low = float(windows[kappas[:, v] == bit, 0].sum())
            p_min = min(p_min, max(low, eps_mix / 2.0))
    return 1.0 - math.log2(p_min)


@dataclass(frozen=True)
class MultipartyBound:
    log_outside_a: float
    log_outside_b: float
    log_ambiguous_a: float
    log_ambiguous_b: float
    log_pe: float
    log_bound: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def multiparty_iid_bound(n, k, graph: TwoColorableGraph, C_prime: float, delta: Optional[float] = None, eta: float = 0.05) -> MultipartyBound:
    """Log-space sum of the outside, misidentification and PE terms, times 2."""
    if not C_prime > 0:
        raise ParameterError(f"C_prime={C_prime!r} must be positive")
    n = float(n)
    delta = default_delta(int(n), multiparty=True) if delta is None else float(delta)
    decay = -2.0 * n * delta * delta / (C_prime * C_prime)
    terms = MultipartyBound(
        log_outside_a=math.log(2 * graph.N_A) + decay if graph.N_A else -math.inf,
        log_outside_b=math.log(2 * graph.N_B) + decay if graph.N_B else -math.inf,
        log_ambiguous_a=math.log(graph.N_A) - n * delta * LN2 if graph.N_A else -math.inf,
        log_ambiguous_b=math.log(graph.N_B) - n * delta * LN2 if graph.N_B else -math.inf,
        log_pe=log_pe_misaccept(graph.n_vertices, eta, float(k) * n),
        log_bound=0.0,
    )
    parts = [terms.log_outside_a, terms.log_outside_b, terms.log_ambiguous_a, terms.log_ambiguous_b, terms.log_pe]
    return MultipartyBound(*parts, LN2 + _logsumexp(parts))


def multiparty_diamond_log(n, k, n_parties: int, log_eps: float) -> float:
    """ln of ``4 (n+kn+1)^(4^M - 1) sqrt(eps)`` for ``M`` qubits per copy."""
    return math.log(4.0) + (4 ** int(n_parties) - 1) * math.log(float(n) + float(k) * float(n) + 1.0) + 0.5 * log_eps


@dataclass(frozen=True)
class MultiConfig:
    n: int
    k: float = 1.0
    delta: Optional[float] = None
    rounds_p1: Optional[int] = None
    rounds_p2: Optional[int] = None
    eps_mix: float = 1e-3
    eta: float = 0.05
    windows: Optional[tuple] = None
    seed: int = 0
    decode_mode: str = "exhaustive"
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        object.__setattr__(self, "n", check_positive_int(self.n, "n"))
        if not float(self.k) > 0:
            raise ParameterError(f"k={self.k!r} must be positive")
        if self.delta is None:
            object.__setattr__(self, "delta", default_delta(self.n, multiparty=True))
        if not 0.0 < float(self.delta) <= 1.0:
            raise ParameterError(f"delta={self.delta!r} outside (0, 1]")
        if not 0.0 < float(self.eps_mix) < 1.0:
            raise ParameterError(f"eps_mix={self.eps_mix!r} outside (0, 1)")
        if not float(self.eta) > 0:
            raise ParameterError(f"eta={self.eta!r} must be positive")
        if (self.rounds_p1 is None) != (self.rounds_p2 is None):
            raise ParameterError("give both rounds_p1 and rounds_p2 or neither")
        if self.rounds_p1 is not None:
            r1 = check_positive_int(self.rounds_p1, "rounds_p1", minimum=0)
            r2 = check_positive_int(self.rounds_p2, "rounds_p2", minimum=0)
            if r1 + r2 > self.n:
                raise ParameterError(f"{r1 + r2} rounds exceed n={self.n}")
        if self.decode_mode not in ("exhaustive", "typical"):
            raise ParameterError(f"unknown decode mode {self.decode_mode!r}")
        if self.decode_mode == "exhaustive" and self.n > EXHAUSTIVE_MAX_N:
            raise ParameterError(f"exhaustive decoding needs n <= {EXHAUSTIVE_MAX_N}, got n={self.n}")
        if self.pe_systems < 1:
            raise ParameterError("k*n must round to at least one PE copy")

    @property
    def pe_systems(self) -> int:
        return int(round(float(self.k) * self.n))

    def round_counts(self, lam: GraphDiagonal, graph: TwoColorableGraph) -> tuple[int, int]:
        if self.rounds_p1 is not None:
            return int(self.rounds_p1), int(self.rounds_p2)
        m, _ = multiparty_yield(lam, graph, self.n, self.delta)
        total = self.n - m
        s_a, s_b = max_entropies(lam, graph)
        w_a = (s_a + self.delta) if graph.N_A else 0.0
        w_b = (s_b + self.delta) if graph.N_B else 0.0
        r1 = int(round(total * w_a / (w_a + w_b)))
        return r1, total - r1


@dataclass
class MultiOutcome:
    branch: Branch
    fail_cause: FailCause
    component_causes: dict
    output_labels: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return int(self.output_labels.shape[0])

    @property
    def infidelity(self) -> Optional[float]:
        if self.branch is not Branch.OK or self.m == 0:
            return None
        return float(self.output_labels.any(axis=1).mean())


def schedule(r1: int, r2: int) -> list:
    out = []
    turn = Subprotocol.P1
    while r1 or r2:
        if turn is Subprotocol.P1 and r1:
            out.append(Subprotocol.P1)
            r1 -= 1
        elif turn is Subprotocol.P2 and r2:
            out.append(Subprotocol.P2)
            r2 -= 1
        turn = Subprotocol.P2 if turn is Subprotocol.P1 else Subprotocol.P1
    return out


def component_rows(functionals, vertex: int, n_vertices: int, n: int) -> np.ndarray:
    """Restrict full-width rows to one vertex; raises if any row leaks into other vertices."""
    if len(functionals) == 0:
        return np.zeros((0, gf2.words(n)), dtype=np.uint64)
    bits = gf2.unpack(np.asarray(functionals), n * n_vertices).reshape(len(functionals), n, n_vertices)
    others = np.delete(bits, vertex, axis=2)
    if others.any():
        raise RuntimeError("component functionals are not block diagonal")
    return gf2.pack(bits[:, :, vertex])


def run_multiparty(config: MultiConfig, lam: GraphDiagonal, graph: TwoColorableGraph, rng=None) -> MultiOutcome:
    """Mix, estimate, alternate P1/P2, decode every component on its own, restore."""
    rng = np.random.default_rng(config.seed if rng is None else rng)
    nv = graph.n_vertices
    mixed = mix_identity(lam, config.eps_mix)
    windows = windows_around(mixed, config.eta) if config.windows is None else np.asarray(config.windows)
    decision, est = multiparty_pe(sample_kappa(mixed, config.pe_systems, rng), graph, windows)
    diag: dict = {}
    if decision is Decision.ABORT:
        return MultiOutcome(Branch.FAIL, FailCause.PE_ABORT, {}, np.zeros((0, nv), np.uint8), diag)

    n = config.n
    kappa0 = sample_kappa(mixed, n, rng)
    kappa = kappa0.copy()
    frame = MultiFrame.initial(n, nv)
    r1, r2 = config.round_counts(mixed, graph)
    history = []
    revealed = {Subprotocol.P1: [], Subprotocol.P2: []}
    rows = {Subprotocol.P1: [], Subprotocol.P2: []}
    for which in schedule(r1, r2):
        subset = draw_subset(kappa.shape[0], rng)
        kappa, rnd = run_subround(kappa, graph, which, subset, None, rng, frame)
        history.append((which, subset))
        revealed[which].append(rnd.revealed)
        rows[which].append(rnd.functionals)
    diag["rounds_p1"], diag["rounds_p2"] = r1, r2

    a_marg, b_marg = marginals(mixed, graph)
    causes = {}
    decoded = kappa0.copy()
    budget_hit = False
    for which, verts, marg, prefix in ((Subprotocol.P1, graph.a_vertices, a_marg, "mu"), (Subprotocol.P2, graph.b_vertices, b_marg, "nu")):
        for c, v in enumerate(verts):
            full = np.stack([r[c] for r in rows[which]]) if rows[which] else []
            comp = component_rows(full, v, nv, n)
            pars = np.array([r[c] for r in revealed[which]], dtype=np.uint8)
            ls = likely_set(marg[c], n, config.delta, bits=1)
            truth = gf2.pack(kappa0[:, v])
            in_likely = bool(ls.contains(truth[None, :])[0])
            if config.decode_mode == "exhaustive":
                res = decode_exhaustive(comp, pars, ls, config.budget)
            elif in_likely:
                res = decode_typical(comp, truth, ls, config.budget)
            else:
                res = DecodeResult(DecodeStatus.OUTSIDE_LIKELY, None, None)
            budget_hit |= res.status is DecodeStatus.BUDGET_EXCEEDED
            if not in_likely:
                causes[f"{prefix}{c}"] = FailCause.OUTSIDE_LIKELY.value
            elif res.status is DecodeStatus.AMBIGUOUS:
                causes[f"{prefix}{c}"] = FailCause.AMBIGUOUS.value
            else:
                causes[f"{prefix}{c}"] = FailCause.NONE.value
                if res.decoded is not None:
                    decoded[:, v] = gf2.unpack(res.decoded, n)
    diag["budget_exceeded"] = budget_hit
    values = set(causes.values())
    if FailCause.OUTSIDE_LIKELY.value in values:
        return MultiOutcome(Branch.FAIL, FailCause.OUTSIDE_LIKELY, causes, np.zeros((0, nv), np.uint8), diag)
    if FailCause.AMBIGUOUS.value in values:
        return MultiOutcome(Branch.FAIL, FailCause.AMBIGUOUS, causes, np.zeros((0, nv), np.uint8), diag)

    predicted = decoded
    for which, subset in history:
        predicted, _ = run_subround(predicted, graph, which, subset, None, 0)
    return MultiOutcome(Branch.OK, FailCause.NONE, causes, kappa ^ predicted, diag)


@dataclass(frozen=True)
class MultiTrialRecord:
    trial: int
    branch: str
    cause: str
    m: int
    infidelity: Optional[float]
    components: tuple
    budget_exceeded: bool = False

    def transcript(self) -> dict:
        return {
            "trial": self.trial,
            "branch": self.branch,
            "cause": self.cause,
            "m": self.m,
            "infidelity": self.infidelity,
            "components": dict(self.components),
        }


def _one_trial(args) -> MultiTrialRecord:
    config, lam, graph, index, seed = args
    out = run_multiparty(config, lam, graph, np.random.default_rng(seed))
    return MultiTrialRecord(
        index,
        out.branch.value,
        out.fail_cause.value,
        out.m,
        out.infidelity,
        tuple(sorted(out.component_causes.items())),
        bool(out.diagnostics.get("budget_exceeded", False)),
    )


@dataclass(frozen=True)
class MultiStats:
    trials: int
    counts: dict
    rates: dict
    intervals: dict
    component_counts: dict
    component_intervals: dict
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
            "component_counts": {k: dict(v) for k, v in self.component_counts.items()},
            "component_intervals": {k: {c: list(iv) for c, iv in v.items()} for k, v in self.component_intervals.items()},
            "budget_exceeded": self.budget_exceeded,
            "mean_infidelity": self.mean_infidelity,
            "confidence": self.confidence,
        }


def monte_carlo_multi(config: MultiConfig, lam: GraphDiagonal, graph: TwoColorableGraph, trials: int, *, workers: Optional[int] = None, confidence: float = 0.99) -> MultiStats:
    trials = check_positive_int(trials, "trials")
    seeds = trial_seeds(config.seed, trials)
    records = run_trials(_one_trial, [(config, lam, graph, i, seeds[i]) for i in range(trials)], workers)
    causes = [c.value for c in FailCause]
    counts = {c: sum(1 for r in records if r.cause == c) for c in causes}
    names = sorted({name for r in records for name, _ in r.components})
    comp_counts = {}
    comp_iv = {}
    for name in names:
        per = {c: 0 for c in (FailCause.OUTSIDE_LIKELY.value, FailCause.AMBIGUOUS.value)}
        for r in records:
            cause = dict(r.components).get(name)
            if cause in per:
                per[cause] += 1
        comp_counts[name] = per
        comp_iv[name] = {c: wilson_interval(v, trials, confidence) for c, v in per.items()}
    inf = [r.infidelity for r in records if r.infidelity is not None]
    return MultiStats(
        trials=trials,
        counts=counts,
        rates={c: counts[c] / trials for c in causes},
        intervals={c: wilson_interval(counts[c], trials, confidence) for c in causes},
        component_counts=comp_counts,
        component_intervals=comp_iv,
        budget_exceeded=sum(1 for r in records if r.budget_exceeded),
        mean_infidelity=float(np.mean(inf)) if inf else None,
        confidence=confidence,
        records=tuple(records),
    )
