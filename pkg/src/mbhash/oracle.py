"""
Brute-force statevector checks of the label algebra.

Qubit 0 is the most significant tensor factor. Everything here is dense and
deliberately naive so it can serve as independent ground truth.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ._validation import ParameterError

MAX_QUBITS = 12
IMAGE_ATOL = 1e-9

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
SQRT_X = np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex) / 2
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}


class DimensionCapError(ParameterError):
    pass


class NonBasisImageError(RuntimeError):
    """The conjugated basis vector is not a single basis vector: the label rule is wrong."""


def _check_qubits(k: int) -> int:
    if not 1 <= k <= MAX_QUBITS:
        raise DimensionCapError(f"{k} qubits exceeds the oracle cap of {MAX_QUBITS}")
    return k


def basis_state(bits: Sequence[int]) -> np.ndarray:
    k = _check_qubits(len(bits))
    v = np.zeros(2 ** k, dtype=complex)
    v[int("".join(str(int(b)) for b in bits), 2)] = 1.0
    return v


def _split(state: np.ndarray):
    """View a vector or a batch of vectors as ``(batch, 2, ..., 2)``."""
    k = int(np.log2(state.shape[-1]))
    return state.reshape((-1,) + (2,) * k), k


def apply_1q(state: np.ndarray, gate: np.ndarray, qubit: int) -> np.ndarray:
    psi, k = _split(state)
    psi = np.moveaxis(psi, qubit + 1, 1)
    psi = np.einsum("ab,nb...->na...", gate, psi)
    return np.moveaxis(psi, 1, qubit + 1).reshape(state.shape)


def apply_cnot(state: np.ndarray, control: int, target: int) -> np.ndarray:
    psi, k = _split(state)
    psi = psi.copy()
    idx = [slice(None)] * (k + 1)
    idx[control + 1] = 1
    sub = psi[tuple(idx)]
    t = target + 1 if target < control else target
    psi[tuple(idx)] = np.flip(sub, axis=t)
    return psi.reshape(state.shape)


def apply_cz(state: np.ndarray, a: int, b: int) -> np.ndarray:
    psi, k = _split(state)
    psi = psi.copy()
    idx = [slice(None)] * (k + 1)
    idx[a + 1] = 1
    idx[b + 1] = 1
    psi[tuple(idx)] *= -1
    return psi.reshape(state.shape)


Gate = tuple  # ("1q", matrix, qubit) | ("cnot", control, target) | ("cz", a, b)


def run_circuit(state: np.ndarray, circuit: Sequence[Gate]) -> np.ndarray:
    for g in circuit:
        if g[0] == "1q":
            state = apply_1q(state, g[1], g[2])
        elif g[0] == "cnot":
            state = apply_cnot(state, g[1], g[2])
        elif g[0] == "cz":
            state = apply_cz(state, g[1], g[2])
        else:
            raise ValueError(f"unknown gate {g[0]!r}")
    return state


def bell_basis(i: int, j: int) -> np.ndarray:
    """``(id (x) X^j Z^i) |B_00>`` on two qubits."""
    v = (basis_state([0, 0]) + basis_state([1, 1])) / np.sqrt(2)
    if i:
        v = apply_1q(v, Z, 1)
    if j:
        v = apply_1q(v, X, 1)
    return v


def tensor(*vectors) -> np.ndarray:
    out = np.array([1.0 + 0j])
    for v in vectors:
        out = np.kron(out, v)
    _check_qubits(int(np.log2(out.size)))
    return out


def graph_state(n_vertices: int, edges) -> np.ndarray:
    _check_qubits(n_vertices)
    v = np.full(2 ** n_vertices, 2 ** (-n_vertices / 2), dtype=complex)
    for a, b in edges:
        v = apply_cz(v, a, b)
    return v


def graph_basis(n_vertices: int, edges, kappa: Sequence[int]) -> np.ndarray:
    """Graph state with ``Z`` applied to every vertex ``j`` having ``kappa[j] = 1``."""
    v = graph_state(n_vertices, edges)
    for j, bit in enumerate(kappa):
        if bit:
            v = apply_1q(v, Z, j)
    return v


def pauli_operator(string: str) -> np.ndarray:
    _check_qubits(len(string))
    out = np.array([[1.0 + 0j]])
    for ch in string:
        out = np.kron(out, PAULI[ch])
    return out


def measure_expectation(state: np.ndarray, pauli: str) -> float:
    op = pauli_operator(pauli)
    if op.shape[0] != state.size:
        raise ParameterError("Pauli string length does not match the state")
    return float(np.real(np.vdot(state, op @ state)))


def correlation_operator(n_vertices: int, edges, j: int) -> str:
    chars = ["I"] * n_vertices
    chars[j] = "X"
    for a, b in edges:
        if a == j:
            chars[b] = "Z"
        elif b == j:
            chars[a] = "Z"
    return "".join(chars)


def conjugate_and_reexpand(circuit: Sequence[Gate], basis: Callable[[tuple], np.ndarray], labels: Sequence[tuple]) -> dict:
    """Map each input label to the unique basis label its image is proportional to."""
    vectors = np.stack([basis(lab) for lab in labels])
    images = run_circuit(vectors, circuit)
    overlaps = np.abs(images @ vectors.conj().T)
    best = np.argmax(overlaps, axis=1)
    top = overlaps[np.arange(len(labels)), best]
    bad = np.flatnonzero(np.abs(top - 1.0) > IMAGE_ATOL)
    if bad.size:
        i = int(bad[0])
        raise NonBasisImageError(f"image of {labels[i]} is not a basis vector (max overlap {top[i]:.3g})")
    return {lab: labels[int(b)] for lab, b in zip(labels, best)}


# ---- circuits realising the label rules ------------------------------------


def bilateral_cnot_circuit() -> list:
    """Qubits A1 B1 A2 B2; pair 1 controls pair 2 on both sides."""
    return [("cnot", 0, 2), ("cnot", 1, 3)]


def hash_local_ops(symbol: int, alice: int, bob: int, inverse: bool = False) -> list:
    """Local gates making the selected bit of a pair its amplitude bit."""
    if symbol in (0, 1):
        return []
    if symbol == 2:
        return [("1q", H, alice), ("1q", H, bob)]
    a, b = (SQRT_X, SQRT_X.conj()) if not inverse else (SQRT_X.conj().T, SQRT_X.T)
    return [("1q", a, alice), ("1q", b, bob)]


def multilateral_cnot_circuit(n_vertices: int, colors: Sequence[str], which: int) -> list:
    """``U1`` (``which=1``) or ``U2`` between copy 1 (qubits ``0..N-1``) and copy 2.

    ``U1``: A vertices CNOT copy 2 -> copy 1, B vertices copy 1 -> copy 2.
    ``U2`` reverses both directions.
    """
    gates = []
    for v in range(n_vertices):
        one, two = v, n_vertices + v
        a_side = colors[v] == "A"
        forward = a_side if which == 1 else not a_side
        gates.append(("cnot", two, one) if forward else ("cnot", one, two))
    return gates


# ---- verification suite -------------------------------------------------------


@dataclass
class VerifyReport:
    counts: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def record(self, rule: str, ok: bool, detail: str = "") -> None:
        passed, total = self.counts.get(rule, (0, 0))
        self.counts[rule] = (passed + int(ok), total + 1)
        if not ok:
            self.failures.append(f"{rule}: {detail}")

    @property
    def ok(self) -> bool:
        return not self.failures and bool(self.counts)

    def lines(self) -> list[str]:
        out = []
        for rule in sorted(self.counts):
            p, t = self.counts[rule]
            out.append(f"{rule}: {p}/{t} {'PASS' if p == t else 'FAIL'}")
        return out


BELL_LABELS = [(i, j) for i in (0, 1) for j in (0, 1)]


def check_bilateral_cnot(rule, report: VerifyReport) -> None:
    pairs = [(a, b) for a in BELL_LABELS for b in BELL_LABELS]
    mapping = conjugate_and_reexpand(
        bilateral_cnot_circuit(),
        lambda lab: tensor(bell_basis(*lab[0]), bell_basis(*lab[1])),
        pairs,
    )
    for a, b in pairs:
        got = tuple(tuple(x) for x in rule(a, b))
        report.record("bilateral_cnot", got == mapping[(a, b)], f"{a},{b} -> {got}, oracle {mapping[(a, b)]}")


def check_pe_sample(rule, report: VerifyReport) -> None:
    for a in BELL_LABELS:
        for b in BELL_LABELS:
            psi = tensor(bell_basis(*a), bell_basis(*b))
            xx = measure_expectation(psi, "XXII")
            zz = measure_expectation(psi, "IIZZ")
            expect = int(xx > 0.5 and zz > 0.5)
            got = int(rule(a, b))
            report.record("pe_sample", got == expect, f"{a},{b} -> {got}, oracle {expect}")


def check_hash_local_ops(select, report: VerifyReport) -> None:
    """After the local gates the amplitude bit equals ``select(symbol, label)``."""
    for symbol in (1, 2, 3):
        mapping = conjugate_and_reexpand(hash_local_ops(symbol, 0, 1), lambda lab: bell_basis(*lab), BELL_LABELS)
        for lab in BELL_LABELS:
            want = select(symbol, lab)
            report.record("select_bit", mapping[lab][1] == want, f"s={symbol} {lab}: oracle amp {mapping[lab][1]}, rule {want}")


def _round_circuit(s: Sequence[int]) -> tuple[list, int]:
    """Local gates, CNOTs into the first involved pair, then undo the sources' gates."""
    involved = [t for t, x in enumerate(s) if x]
    tgt = involved[0]
    circ = []
    for t in involved:
        circ += hash_local_ops(s[t], 2 * t, 2 * t + 1)
    for t in involved[1:]:
        circ += [("cnot", 2 * t, 2 * tgt), ("cnot", 2 * t + 1, 2 * tgt + 1)]
    for t in involved[1:]:
        circ += hash_local_ops(s[t], 2 * t, 2 * t + 1, inverse=True)
    return circ, tgt


def check_hash_round(round_rule, report: VerifyReport, n_pairs: int = 3, strings: Optional[Sequence] = None) -> None:
    """Full hashing round on ``n_pairs`` pairs against the statevector.

    ``round_rule(labels, s) -> (survivors, parity)``; the oracle parity is the
    target's amplitude bit, read by Z (x) Z after all gates.
    """
    labels_all = list(itertools.product(BELL_LABELS, repeat=n_pairs))
    basis = lambda labs: tensor(*[bell_basis(*l) for l in labs])
    if strings is None:
        strings = [s for s in itertools.product(range(4), repeat=n_pairs) if any(s)]
    for s in strings:
        circ, tgt = _round_circuit(s)
        image = conjugate_and_reexpand(circ, basis, labels_all)
        for labs in labels_all:
            expect_survivors = [tuple(x) for t, x in enumerate(image[labs]) if t != tgt]
            expect_parity = image[labs][tgt][1]
            got_surv, got_par = round_rule([tuple(l) for l in labs], tuple(s))
            ok = [tuple(x) for x in got_surv] == expect_survivors and int(got_par) == expect_parity
            report.record("hash_round", ok, f"s={s} {labs}")


def two_colorable_graphs(max_vertices: int = 4):
    """Every labelled simple graph on 2..max_vertices vertices that is two-colorable."""
    from .graph import NotTwoColorableError, check_two_colorable

    for nv in range(2, max_vertices + 1):
        all_edges = list(itertools.combinations(range(nv), 2))
        for mask in range(1 << len(all_edges)):
            edges = [e for b, e in enumerate(all_edges) if mask >> b & 1]
            try:
                colors = check_two_colorable(nv, edges)
            except NotTwoColorableError:
                continue
            yield nv, edges, colors


def check_graph_basis(report: VerifyReport, max_vertices: int = 4) -> None:
    for nv, edges, _ in two_colorable_graphs(max_vertices):
        for kappa in itertools.product((0, 1), repeat=nv):
            psi = graph_basis(nv, edges, kappa)
            for j in range(nv):
                ev = measure_expectation(psi, correlation_operator(nv, edges, j))
                report.record("graph_basis", abs(ev - (-1) ** kappa[j]) < 1e-9, f"N={nv} {edges} kappa={kappa} K_{j}")


def check_multilateral(u1, u2, report: VerifyReport, max_vertices: int = 4) -> None:
    """``u1``/``u2`` take and return pairs of per-vertex kappa tuples."""
    for nv, edges, colors in two_colorable_graphs(max_vertices):
        kappas = list(itertools.product((0, 1), repeat=nv))
        pairs = [(a, b) for a in kappas for b in kappas]
        basis = lambda lab: tensor(graph_basis(nv, edges, lab[0]), graph_basis(nv, edges, lab[1]))
        for which, rule, name in ((1, u1, "u1"), (2, u2, "u2")):
            mapping = conjugate_and_reexpand(multilateral_cnot_circuit(nv, colors, which), basis, pairs)
            for a, b in pairs:
                got = tuple(tuple(int(x) for x in part) for part in rule(colors, a, b))
                report.record(name, got == mapping[(a, b)], f"N={nv} {edges} {a},{b}")


def readout_distribution(nv: int, edges, kappa, x_color: str, colors) -> dict:
    """Outcome probabilities when ``x_color`` vertices are read in X, the rest in Z."""
    psi = graph_basis(nv, edges, kappa)
    for v in range(nv):
        if colors[v] == x_color:
            psi = apply_1q(psi, H, v)
    probs = np.abs(psi) ** 2
    out = {}
    for idx in np.flatnonzero(probs > 1e-12):
        bits = tuple(int(c) for c in format(idx, f"0{nv}b"))
        out[bits] = float(probs[idx])
    return out


def check_readout(report: VerifyReport, max_vertices: int = 4) -> None:
    """Every possible M1/M2 outcome satisfies the parity relation with the hidden label."""
    for nv, edges, colors in two_colorable_graphs(max_vertices):
        nbrs = {v: set() for v in range(nv)}
        for a, b in edges:
            nbrs[a].add(b)
            nbrs[b].add(a)
        for kappa in itertools.product((0, 1), repeat=nv):
            for x_color in ("A", "B"):
                dist = readout_distribution(nv, edges, kappa, x_color, colors)
                ok = True
                for bits in dist:
                    for v in range(nv):
                        if colors[v] == x_color:
                            rec = (bits[v] + sum(bits[u] for u in nbrs[v])) % 2
                            ok &= rec == kappa[v]
                report.record(f"readout_{'m1' if x_color == 'A' else 'm2'}", ok, f"N={nv} {edges} {kappa}")


def default_rules() -> dict:
    from . import bell, graph, hashing, param_est

    def round_rule(labels, s):
        ens = hashing.Ensemble.from_labels(labels)
        out, rnd = hashing.run_round(ens, np.array(s, dtype=np.uint8))
        return out.labels, rnd.measured_parity

    return {
        "bilateral_cnot": bell.bilateral_cnot,
        "pe_sample": param_est.pe_sample,
        "select_bit": bell.select_bit,
        "hash_round": round_rule,
        "u1": graph.u1_kappa,
        "u2": graph.u2_kappa,
    }


def verify(rules: Optional[dict] = None, *, max_vertices: int = 4, round_pairs: int = 3) -> VerifyReport:
    """Run the whole oracle suite; ``rules`` overrides individual label rules."""
    active = default_rules()
    if rules:
        unknown = set(rules) - set(active)
        if unknown:
            raise ParameterError(f"unknown rules: {sorted(unknown)}")
        active.update(rules)
    report = VerifyReport()
    check_bilateral_cnot(active["bilateral_cnot"], report)
    check_pe_sample(active["pe_sample"], report)
    check_hash_local_ops(active["select_bit"], report)
    check_hash_round(active["hash_round"], report, n_pairs=round_pairs)
    check_graph_basis(report, max_vertices)
    check_multilateral(active["u1"], active["u2"], report, max_vertices)
    check_readout(report, max_vertices)
    return report
