import numpy as np
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from mbhash import gf2


def bit_matrix(max_rows=12, max_bits=140):
    return st.integers(1, max_bits).flatmap(
        lambda nb: st.tuples(st.just(nb), arrays(np.uint8, st.tuples(st.integers(0, max_rows), st.just(nb)), elements=st.integers(0, 1)))
    )


@given(bit_matrix())
def test_pack_roundtrip(case):
    nbits, bits = case
    packed = gf2.pack(bits)
    assert packed.shape == (bits.shape[0], gf2.words(nbits))
    assert np.array_equal(gf2.unpack(packed, nbits), bits)


def test_bit_layout():
    v = gf2.unit(70, 130)
    assert v.tolist() == [0, 1 << 6, 0]
    assert gf2.get_bit(v, 70) == 1 and gf2.get_bit(v, 69) == 0
    assert gf2.popcount(gf2.pack([1, 0, 1, 1])) == 3


@given(bit_matrix(max_rows=1), st.data())
def test_parity_matches_dot_product(case, data):
    nbits, bits = case
    if bits.shape[0] == 0:
        return
    x = data.draw(arrays(np.uint8, nbits, elements=st.integers(0, 1)))
    assert gf2.parity(gf2.pack(bits[0]), gf2.pack(x)) == int(bits[0] @ x) % 2


@given(bit_matrix(max_bits=40))
@settings(max_examples=60)
def test_rank_matches_dense_elimination(case):
    nbits, bits = case
    expected = 0
    m = bits.copy().astype(np.uint8)
    for col in range(nbits):
        piv = [r for r in range(expected, m.shape[0]) if m[r, col]]
        if not piv:
            continue
        m[[expected, piv[0]]] = m[[piv[0], expected]]
        for r in range(m.shape[0]):
            if r != expected and m[r, col]:
                m[r] ^= m[expected]
        expected += 1
    assert gf2.rank(gf2.pack(bits), nbits) == expected


@given(bit_matrix(max_rows=10, max_bits=14), st.data())
@settings(max_examples=60)
def test_solution_coset(case, data):
    nbits, bits = case
    rows = gf2.pack(bits)
    secret = data.draw(arrays(np.uint8, nbits, elements=st.integers(0, 1)))
    rhs = gf2.parity(rows, gf2.pack(secret)) if len(rows) else np.zeros(0, np.uint8)
    ech = gf2.rref(rows, nbits, rhs)
    assert ech.consistent
    coset = gf2.span(gf2.particular_solution(ech, nbits), gf2.nullspace(ech, nbits))
    assert len(coset) == 2 ** (nbits - ech.rank)
    assert (gf2.pack(secret) == coset).all(axis=1).any()
    if len(rows):
        assert (gf2.parity(rows[None, :, :], coset[:, None, :]) == rhs[None, :]).all()


def test_inconsistent_system():
    rows = gf2.pack([[1, 1, 0], [1, 1, 0]])
    assert not gf2.rref(rows, 3, [0, 1]).consistent
