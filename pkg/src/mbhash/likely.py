"""
Likely sets of i.i.d. strings and the decoding decision built on them.

A string of ``n`` symbols drawn from ``p`` is *likely* when its surprisal
``-sum log2 p(x_t)`` lies strictly within ``n * delta`` of ``n * S(p)``.
Symbols are packed ``bits`` bits each, symbol ``t`` occupying bits
``t*bits .. t*bits + bits - 1`` (least significant first).
"""

from __future__ import annotations

import enum
import functools
import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import gf2
from ._validation import ParameterError, check_probability_vector

MAX_TYPE_CLASSES = 20_000_000
DEFAULT_BUDGET = 1 << 20


class DecodeStatus(enum.Enum):
    OK = "ok"
    OUTSIDE_LIKELY = "outside_likely"
    AMBIGUOUS = "ambiguous"
    BUDGET_EXCEEDED = "budget_exceeded"


class DecodeResult(NamedTuple):
    status: DecodeStatus
    decoded: Optional[np.ndarray]
    consistent_likely: Optional[int]


def _compositions(n: int, parts: int) -> np.ndarray:
    if parts == 1:
        return np.array([[n]], dtype=np.int64)
    if math.comb(n + parts - 1, parts - 1) > MAX_TYPE_CLASSES:
        raise OverflowError("too many type classes")
    rows = [c + (n - sum(c),) for c in itertools.product(range(n + 1), repeat=parts - 1) if sum(c) <= n]
    return np.array(rows, dtype=np.int64)


@dataclass(frozen=True)
class LikelySet:
    """Type-class description of the likely set, grouped by equal probabilities."""

    p: tuple
    bits: int
    n: int
    delta: float
    groups: tuple
    group_types: tuple
    size: Optional[int]

    @property
    def entropy(self) -> float:
        arr = np.array(self.p)
        nz = arr[arr > 0]
        return float(-(nz * np.log2(nz)).sum())

    @property
    def nbits(self) -> int:
        return self.n * self.bits

    def surprisal_of_counts(self, counts) -> np.ndarray:
        counts = np.asarray(counts, dtype=np.int64)
        p = np.array(self.p)
        with np.errstate(divide="ignore"):
            s = -np.log2(p)
        impossible = (counts[..., p == 0] > 0).any(axis=-1)
        safe = np.where(p > 0, s, 0.0)
        out = counts @ safe
        return np.where(impossible, np.inf, out)

    def contains_counts(self, counts) -> np.ndarray:
        gap = np.abs(self.surprisal_of_counts(counts) - self.n * self.entropy)
        return gap < self.n * self.delta

    def symbol_counts(self, packed) -> np.ndarray:
        """Per-symbol occurrence counts of packed strings, shape ``(K, len(p))``."""
        packed = np.atleast_2d(np.asarray(packed, dtype=np.uint64))
        bits = gf2.unpack(packed, self.nbits).reshape(packed.shape[0], self.n, self.bits).astype(np.int64)
        values = (bits << np.arange(self.bits)).sum(axis=-1)
        return np.stack([(values == v).sum(axis=-1) for v in range(len(self.p))], axis=-1)

    def contains(self, packed) -> np.ndarray:
        return self.contains_counts(self.symbol_counts(packed))

    def log2_size(self) -> float:
        return math.log2(self.size) if self.size else (-math.inf if self.size == 0 else math.inf)

    def enumerate(self, limit: int) -> np.ndarray:
        """All members, packed; refuses when the set is larger than ``limit``."""
        if self.size is None or self.size > limit:
            raise OverflowError("likely set exceeds enumeration limit")
        return _enumerate_members(self)

    def pack_symbols(self, symbols) -> np.ndarray:
        symbols = np.asarray(symbols, dtype=np.int64)
        bits = ((symbols[..., None] >> np.arange(self.bits)) & 1).reshape(symbols.shape[:-1] + (self.nbits,))
        return gf2.pack(bits)


@functools.lru_cache(maxsize=64)
def _enumerate_cached(ls: LikelySet) -> np.ndarray:
    rows = []
    n = ls.n
    for gtype in ls.group_types:
        members = [ls.groups[g] for g in range(len(gtype))]
        for assignment in _group_placements(n, gtype):
            # assignment: per position, the group index
            choices = [members[g] for g in assignment]
            for symbols in itertools.product(*choices):
                rows.append(symbols)
    if not rows:
        return np.zeros((0, gf2.words(ls.nbits)), dtype=np.uint64)
    return ls.pack_symbols(np.array(rows, dtype=np.int64))


def _enumerate_members(ls: LikelySet) -> np.ndarray:
    return _enumerate_cached(ls).copy()


def _group_placements(n: int, gtype):
    """Yield every length-``n`` tuple of group indices with the given counts."""

    def rec(free, g):
        if g == len(gtype) - 1:
            yield {i: g for i in free}
            return
        for chosen in itertools.combinations(free, gtype[g]):
            rest = [i for i in free if i not in set(chosen)]
            for tail in rec(rest, g + 1):
                tail = dict(tail)
                tail.update({i: g for i in chosen})
                yield tail

    for placement in rec(list(range(n)), 0):
        yield tuple(placement[i] for i in range(n))


@functools.lru_cache(maxsize=256)
def _build(p: tuple, bits: int, n: int, delta: float) -> LikelySet:
    arr = np.array(p)
    support = [v for v in range(len(p)) if arr[v] > 0]
    # symbols sharing a probability are interchangeable for membership
    keyed: dict[float, list[int]] = {}
    for v in support:
        keyed.setdefault(float(arr[v]), []).append(v)
    probs = sorted(keyed, reverse=True)
    groups = tuple(tuple(keyed[q]) for q in probs)
    entropy = float(-(arr[support] * np.log2(arr[support])).sum())
    try:
        comps = _compositions(n, len(groups))
    except OverflowError:
        return LikelySet(p, bits, n, delta, groups, (), None)
    surprisal = comps @ (-np.log2(np.array(probs)))
    keep = np.abs(surprisal - n * entropy) < n * delta
    types = tuple(tuple(int(c) for c in row) for row in comps[keep])
    size = 0
    for t in types:
        count = math.factorial(n)
        for c, g in zip(t, groups):
            count = count // math.factorial(c) * len(g) ** c
        size += count
    return LikelySet(p, bits, n, delta, groups, types, size)


def likely_set(p, n: int, delta: float, bits: int) -> LikelySet:
    """Cached likely set of ``n`` i.i.d. symbols from ``p``."""
    arr = check_probability_vector(p, "p")
    if len(arr) > 1 << bits:
        raise ParameterError(f"{len(arr)} symbols do not fit in {bits} bits")
    if not delta > 0:
        raise ParameterError(f"delta={delta!r} must be positive")
    return _build(tuple(float(x) for x in arr), int(bits), int(n), float(delta))


def decode_exhaustive(rows, parities, ls: LikelySet, budget: int = DEFAULT_BUDGET) -> DecodeResult:
    """Search the likely set (or the solution coset, if smaller) for consistent strings."""
    nbits = ls.nbits
    rows = np.asarray(rows, dtype=np.uint64).reshape(-1, gf2.words(nbits))
    parities = np.asarray(parities, dtype=np.uint8)
    ech = gf2.rref(rows, nbits, parities)
    if not ech.consistent:
        return DecodeResult(DecodeStatus.OUTSIDE_LIKELY, None, 0)
    dim = nbits - ech.rank
    if dim <= math.log2(budget) and (ls.size is None or 2 ** dim <= ls.size):
        coset = gf2.span(gf2.particular_solution(ech, nbits), gf2.nullspace(ech, nbits))
        hits = coset[ls.contains(coset)]
    elif ls.size is not None and ls.size <= budget:
        members = ls.enumerate(budget)
        ok = (gf2.parity(members[:, None, :], rows[None, :, :]) == parities[None, :]).all(axis=1) if rows.size else np.ones(len(members), bool)
        hits = members[ok]
    else:
        return DecodeResult(DecodeStatus.BUDGET_EXCEEDED, None, None)
    if len(hits) == 0:
        return DecodeResult(DecodeStatus.OUTSIDE_LIKELY, None, 0)
    if len(hits) > 1:
        return DecodeResult(DecodeStatus.AMBIGUOUS, None, len(hits))
    return DecodeResult(DecodeStatus.OK, hits[0], 1)


def decode_typical(rows, truth, ls: LikelySet, budget: int = DEFAULT_BUDGET, n_rows: Optional[int] = None) -> DecodeResult:
    """Check the sampled string is likely and that no other likely string matches its parities.

    ``rows`` may be a zero-argument callable so that costly functionals are
    only built when ``n_rows`` leaves room for enumeration.
    """
    nbits = ls.nbits
    truth = np.asarray(truth, dtype=np.uint64)
    if not bool(ls.contains(truth[None, :])[0]):
        return DecodeResult(DecodeStatus.OUTSIDE_LIKELY, None, None)
    if ls.size == 1:
        return DecodeResult(DecodeStatus.OK, truth, 1)
    log_budget = math.log2(budget)
    too_big = ls.size is None or ls.size > budget
    if n_rows is not None and nbits - n_rows > log_budget and too_big:
        return DecodeResult(DecodeStatus.BUDGET_EXCEEDED, None, None)
    if callable(rows):
        rows = rows()
    rows = np.asarray(rows, dtype=np.uint64).reshape(-1, gf2.words(nbits))
    if nbits - len(rows) > log_budget and too_big:
        return DecodeResult(DecodeStatus.BUDGET_EXCEEDED, None, None)
    ech = gf2.rref(rows, nbits)
    dim = nbits - ech.rank
    if dim <= log_budget:
        coset = gf2.span(truth, gf2.nullspace(ech, nbits))
        count = int(ls.contains(coset).sum())
    elif not too_big:
        members = ls.enumerate(budget)
        want = gf2.parity(rows, truth)
        ok = (gf2.parity(members[:, None, :], rows[None, :, :]) == want[None, :]).all(axis=1)
        count = int(ok.sum())
    else:
        return DecodeResult(DecodeStatus.BUDGET_EXCEEDED, None, None)
    if count > 1:
        return DecodeResult(DecodeStatus.AMBIGUOUS, None, count)
    return DecodeResult(DecodeStatus.OK, truth, 1)
