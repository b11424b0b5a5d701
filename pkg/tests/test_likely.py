import itertools
import math

import numpy as np
import pytest

from mbhash import gf2
from mbhash._validation import ParameterError
from mbhash.likely import DecodeStatus, decode_exhaustive, decode_typical, likely_set


def brute_force_members(p, n, delta, bits):
    p = np.asarray(p, dtype=float)
    S = -sum(x * math.log2(x) for x in p if x > 0)
    out = []
    for symbols in itertools.product(range(len(p)), repeat=n):
        if any(p[s] == 0 for s in symbols):
            continue
        surprisal = -sum(math.log2(p[s]) for s in symbols)
        if abs(surprisal - n * S) < n * delta:
            out.append(symbols)
    return out


@pytest.mark.parametrize(
    "p,n,delta,bits",
    [
        ([0.85, 0.05, 0.05, 0.05], 6, 0.3, 2),
        ([0.7, 0.2, 0.1, 0.0], 5, 0.5, 2),
        ([0.9, 0.1], 9, 0.2, 1),
        ([0.5, 0.5], 4, 0.1, 1),
    ],
)
def test_likely_set_matches_brute_force(p, n, delta, bits):
    ls = likely_set(p, n, delta, bits)
    expected = brute_force_members(p, n, delta, bits)
    assert ls.size == len(expected)
    members = ls.enumerate(10**6)
    got = {tuple(int(x) for x in row) for row in members}
    assert got == {tuple(int(x) for x in ls.pack_symbols(np.array(s))) for s in expected}
    assert ls.contains(members).all()


def test_contains_rejects_impossible_symbols():
    ls = likely_set([0.9, 0.1, 0.0, 0.0], 3, 1.0, 2)
    assert not ls.contains(ls.pack_symbols(np.array([[2, 0, 0]])))[0]


def test_zero_entropy_set_is_single_string():
    ls = likely_set([1.0, 0.0, 0.0, 0.0], 10, 0.1, 2)
    assert ls.size == 1 and ls.entropy == 0.0


def test_enumeration_limit_and_validation():
    ls = likely_set([0.5, 0.5], 20, 0.1, 1)
    assert ls.size == 2 ** 20 and ls.log2_size() == 20.0
    with pytest.raises(OverflowError):
        ls.enumerate(1000)
    with pytest.raises(ParameterError):
        likely_set([0.2, 0.2, 0.2, 0.2, 0.2], 3, 0.1, 2)
    with pytest.raises(ParameterError):
        likely_set([0.5, 0.5], 3, 0.0, 1)


def _system(n, rows, truth_symbols, ls, seed):
    rng = np.random.default_rng(seed)
    nbits = ls.nbits
    A = gf2.pack(rng.integers(0, 2, size=(rows, nbits), dtype=np.uint8))
    truth = ls.pack_symbols(np.array(truth_symbols))
    return A, gf2.parity(A, truth), truth


def test_exhaustive_decoder_recovers_unique_string():
    ls = likely_set([0.9, 0.1], 12, 0.3, 1)
    truth_symbols = [0] * 11 + [1]
    A, par, truth = _system(12, 12, truth_symbols, ls, 0)
    res = decode_exhaustive(A, par, ls)
    assert res.status is DecodeStatus.OK
    assert np.array_equal(res.decoded, truth)


def test_exhaustive_decoder_reports_ambiguity_and_outside():
    ls = likely_set([0.9, 0.1], 12, 0.3, 1)
    A, par, truth = _system(12, 2, [0] * 11 + [1], ls, 1)
    res = decode_exhaustive(A, par, ls)
    assert res.status is DecodeStatus.AMBIGUOUS and res.consistent_likely > 1
    # a string far outside the likely set: many ones, full-rank system pins it down
    A, par, _ = _system(12, 12, [1] * 12, ls, 2)
    full = gf2.rank(A, 12) == 12
    if full:
        assert decode_exhaustive(A, par, ls).status is DecodeStatus.OUTSIDE_LIKELY


def test_exhaustive_decoder_budget():
    ls = likely_set([0.5, 0.5], 20, 0.1, 1)
    assert decode_exhaustive(np.zeros((0, 1), np.uint64), [], ls, budget=1000).status is DecodeStatus.BUDGET_EXCEEDED


def test_typical_decoder_agrees_with_exhaustive():
    ls = likely_set([0.85, 0.05, 0.05, 0.05], 8, 0.3, 2)
    rng = np.random.default_rng(4)
    for trial in range(40):
        symbols = rng.choice(4, size=8, p=ls.p)
        if not ls.contains(ls.pack_symbols(symbols[None, :]))[0]:
            continue
        rows = int(rng.integers(1, 16))
        A, par, truth = _system(8, rows, symbols, ls, trial)
        ex = decode_exhaustive(A, par, ls)
        ty = decode_typical(A, truth, ls)
        assert ex.status == ty.status
        if ex.status is DecodeStatus.OK:
            assert np.array_equal(ex.decoded, truth)


def test_typical_decoder_short_circuits_without_building_rows():
    ls = likely_set([0.5, 0.5], 20, 0.1, 1)
    truth = ls.enumerate(2 ** 20)[0]

    def boom():
        raise AssertionError("rows should not be built")

    res = decode_typical(boom, truth, ls, budget=16, n_rows=2)
    assert res.status is DecodeStatus.BUDGET_EXCEEDED
