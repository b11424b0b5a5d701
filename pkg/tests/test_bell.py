import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mbhash import oracle
from mbhash.bell import (
    ALL_LABELS,
    BellDiagonal,
    BellLabel,
    InvalidSymbolError,
    bilateral_cnot,
    depolarize,
    fidelity_to_q,
    q_to_fidelity,
    select_bit,
    twirl_to_werner,
    werner,
    werner_entropy,
)
from mbhash._validation import ParameterError

unit = st.floats(0.0, 1.0, allow_nan=False)
fidelity = st.floats(0.25, 1.0, allow_nan=False)
labels = st.sampled_from(ALL_LABELS)


def test_label_index_roundtrip():
    assert [lab.index for lab in ALL_LABELS] == [0, 1, 2, 3]
    assert ALL_LABELS[2] == BellLabel(1, 0)


def test_bilateral_cnot_identity_pair():
    assert bilateral_cnot(BellLabel(0, 0), BellLabel(0, 0)) == (BellLabel(0, 0), BellLabel(0, 0))


def test_bilateral_cnot_oracle_example():
    # statevector value: the control takes the target's phase, the target keeps it
    assert bilateral_cnot(BellLabel(1, 0), BellLabel(0, 1)) == (BellLabel(1, 0), BellLabel(0, 1))
    assert bilateral_cnot(BellLabel(0, 1), BellLabel(1, 0)) == (BellLabel(1, 1), BellLabel(1, 1))


def test_bilateral_cnot_matches_oracle_on_all_pairs():
    rep = oracle.VerifyReport()
    oracle.check_bilateral_cnot(bilateral_cnot, rep)
    assert rep.counts["bilateral_cnot"] == (16, 16)


@given(labels, labels)
def test_bilateral_cnot_is_an_involution(a, b):
    assert bilateral_cnot(*bilateral_cnot(a, b)) == (a, b)


@given(labels, labels, labels, labels)
def test_bilateral_cnot_is_linear(a, b, c, d):
    xor = lambda x, y: BellLabel(x[0] ^ y[0], x[1] ^ y[1])
    left = bilateral_cnot(xor(a, c), xor(b, d))
    p, q = bilateral_cnot(a, b)
    r, s = bilateral_cnot(c, d)
    assert left == (xor(p, r), xor(q, s))


def test_select_bit_examples():
    assert select_bit(1, BellLabel(0, 1)) == 1
    assert select_bit(0, BellLabel(1, 1)) is None
    assert select_bit(3, BellLabel(1, 1)) == 0
    assert select_bit(2, BellLabel(1, 0)) == 1
    with pytest.raises(InvalidSymbolError):
        select_bit(4, BellLabel(0, 0))


def test_select_bit_matches_local_gate_oracle():
    rep = oracle.VerifyReport()
    oracle.check_hash_local_ops(select_bit, rep)
    assert rep.ok and rep.counts["select_bit"] == (12, 12)


def test_depolarize_examples():
    pure = BellDiagonal([1, 0, 0, 0])
    assert depolarize(pure, 1.0) == pure
    assert depolarize(pure, 0.8).allclose(BellDiagonal([0.85, 0.05, 0.05, 0.05]))
    uniform = BellDiagonal([0.25] * 4)
    assert depolarize(uniform, 0.3).allclose(uniform)


@given(st.lists(unit, min_size=4, max_size=4).filter(lambda v: sum(v) > 0), unit)
def test_depolarize_stays_on_simplex(raw, alpha):
    p = np.array(raw) / sum(raw)
    out = depolarize(BellDiagonal(p / p.sum()), alpha).p
    assert abs(out.sum() - 1.0) < 1e-12 and (out >= 0).all()


@given(fidelity, unit)
def test_depolarize_multiplies_retention(F, alpha):
    out = depolarize(werner(F), alpha)
    expected = werner(q_to_fidelity(alpha * fidelity_to_q(F)))
    assert out.allclose(expected)


def test_depolarize_rejects_alpha_outside_unit_interval():
    with pytest.raises(ParameterError):
        depolarize(werner(0.9), 1.5)


def test_fidelity_q_conversion():
    assert fidelity_to_q(0.8107) == pytest.approx(0.7476, abs=5e-4)
    assert q_to_fidelity(1.0) == 1.0
    assert q_to_fidelity(0.9) == pytest.approx(0.925, abs=1e-15)
    with pytest.raises(ParameterError):
        fidelity_to_q(0.1)


@given(unit)
def test_q_fidelity_roundtrip(q):
    assert fidelity_to_q(q_to_fidelity(q)) == pytest.approx(q, abs=1e-12)


def test_twirl_examples():
    out = twirl_to_werner(BellDiagonal([0.9, 0.1, 0.0, 0.0]))
    assert out.allclose(BellDiagonal([0.9, 1 / 30, 1 / 30, 1 / 30]))
    assert twirl_to_werner(werner(0.8)).allclose(werner(0.8))
    assert twirl_to_werner(BellDiagonal([0.25] * 4)).allclose(BellDiagonal([0.25] * 4))


def test_werner_entropy_values():
    assert werner_entropy(1.0) == 0.0
    assert werner_entropy(0.25) == pytest.approx(2.0, abs=1e-12)
    # 50-digit reference value
    assert werner_entropy(0.95) == pytest.approx(0.36564508215201393784, rel=1e-13)
    assert werner(0.95).entropy() == pytest.approx(werner_entropy(0.95), rel=1e-13)


def test_werner_entropy_strictly_decreasing():
    s = [werner_entropy(F) for F in np.linspace(0.2501, 1.0, 1000)]
    assert all(a > b for a, b in zip(s, s[1:]))


def test_probability_validation():
    with pytest.raises(ParameterError):
        BellDiagonal([0.5, 0.5, 0.1, 0.0])
    with pytest.raises(ParameterError):
        BellDiagonal([1.0, 0.0, 0.0])
    # rounding noise below tolerance is absorbed
    p = BellDiagonal([0.7, 0.1, 0.1, 0.1 + 5e-13]).p
    assert abs(p.sum() - 1.0) < 1e-15
    with pytest.raises(ParameterError):
        werner(1.2)


def test_bell_diagonal_is_immutable():
    state = werner(0.9)
    with pytest.raises(ValueError):
        state.p[0] = 0.5
    assert {state, werner(0.9)} == {state}
