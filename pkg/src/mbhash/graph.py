"""
Label algebra of two-colorable graph states.

The basis state ``kappa`` of a graph is the graph state with ``Z`` applied to
each vertex ``j`` with ``kappa[j] = 1``; it is the ``(-1)**kappa[j]``
eigenstate of the correlation operator of vertex ``j``. A label splits
``kappa`` into ``mu`` (color-A vertices, ascending) and ``nu`` (color B).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from ._validation import ParameterError, check_probability_vector
from .bounds import hashing_yield

MAX_DENSE_VERTICES = 12


class NotTwoColorableError(ParameterError):
    pass


def check_two_colorable(n_vertices: int, edges) -> tuple[str, ...]:
    """BFS bipartition; the lowest vertex of every component is colored A."""
    if n_vertices < 1:
        raise ParameterError("graph needs at least one vertex")
    adj = [[] for _ in range(n_vertices)]
    for a, b in edges:
        if a == b or not (0 <= a < n_vertices and 0 <= b < n_vertices):
            raise ParameterError(f"bad edge ({a}, {b}) for {n_vertices} vertices")
        adj[a].append(b)
        adj[b].append(a)
    color = [None] * n_vertices
    for root in range(n_vertices):
        if color[root] is not None:
            continue
        color[root] = "A"
        queue = deque([root])
        while queue:
            v = queue.popleft()
            other = "B" if color[v] == "A" else "A"
            for u in sorted(adj[v]):
                if color[u] is None:
                    color[u] = other
                    queue.append(u)
                elif color[u] == color[v]:
                    raise NotTwoColorableError(f"odd cycle through edge ({v}, {u})")
    return tuple(color)


@dataclass(frozen=True)
class TwoColorableGraph:
    n_vertices: int
    edges: tuple

    def __post_init__(self):
        edges = tuple(sorted({tuple(sorted((int(a), int(b)))) for a, b in self.edges}))
        object.__setattr__(self, "edges", edges)
        check_two_colorable(self.n_vertices, edges)

    @cached_property
    def colors(self) -> tuple[str, ...]:
        return check_two_colorable(self.n_vertices, self.edges)

    @cached_property
    def a_vertices(self) -> tuple[int, ...]:
        return tuple(v for v, c in enumerate(self.colors) if c == "A")

    @cached_property
    def b_vertices(self) -> tuple[int, ...]:
        return tuple(v for v, c in enumerate(self.colors) if c == "B")

    @property
    def N_A(self) -> int:
        return len(self.a_vertices)

    @property
    def N_B(self) -> int:
        return len(self.b_vertices)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return tuple(sorted({b for a, b in self.edges if a == v} | {a for a, b in self.edges if b == v}))

    @cached_property
    def adjacency(self) -> np.ndarray:
        m = np.zeros((self.n_vertices, self.n_vertices), dtype=np.uint8)
        for a, b in self.edges:
            m[a, b] = m[b, a] = 1
        return m


def star_graph(n_vertices: int) -> TwoColorableGraph:
    """Star with center 0; its graph states are GHZ states up to local unitaries."""
    return TwoColorableGraph(n_vertices, tuple((0, v) for v in range(1, n_vertices)))


def read_edge_list(path) -> TwoColorableGraph:
    """First line the vertex count, then one ``u v`` pair per line (0-indexed)."""
    lines = [ln.split("#", 1)[0].strip() for ln in Path(path).read_text().splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ParameterError(f"{path}: empty graph file")
    try:
        n = int(lines[0])
        edges = [tuple(int(x) for x in ln.split()) for ln in lines[1:]]
    except ValueError as exc:
        raise ParameterError(f"{path}: malformed edge list ({exc})") from None
    if any(len(e) != 2 for e in edges):
        raise ParameterError(f"{path}: every edge line needs exactly two vertices")
    return TwoColorableGraph(n, tuple(edges))


class GraphLabel(NamedTuple):
    mu: tuple
    nu: tuple

    @classmethod
    def from_kappa(cls, graph: TwoColorableGraph, kappa) -> "GraphLabel":
        kappa = tuple(int(x) for x in kappa)
        return cls(tuple(kappa[v] for v in graph.a_vertices), tuple(kappa[v] for v in graph.b_vertices))

    def kappa(self, graph: TwoColorableGraph) -> tuple:
        out = [0] * graph.n_vertices
        for v, bit in zip(graph.a_vertices, self.mu):
            out[v] = bit
        for v, bit in zip(graph.b_vertices, self.nu):
            out[v] = bit
        return tuple(out)


def _xor(a, b):
    if len(a) != len(b):
        raise ParameterError("label shapes differ")
    return tuple(int(x) ^ int(y) for x, y in zip(a, b))


def u1_apply(l1: GraphLabel, l2: GraphLabel) -> tuple[GraphLabel, GraphLabel]:
    """``U1``: the second copy collects the first's ``mu``, the first collects ``nu``."""
    return GraphLabel(tuple(l1.mu), _xor(l1.nu, l2.nu)), GraphLabel(_xor(l1.mu, l2.mu), tuple(l2.nu))


def u2_apply(l1: GraphLabel, l2: GraphLabel) -> tuple[GraphLabel, GraphLabel]:
    """``U2``: the second copy collects the first's ``nu``, the first collects ``mu``."""
    return GraphLabel(_xor(l1.mu, l2.mu), tuple(l1.nu)), GraphLabel(tuple(l2.mu), _xor(l1.nu, l2.nu))


def _on_kappa(rule, colors: Sequence[str], k1, k2):
    a = [v for v, c in enumerate(colors) if c == "A"]
    b = [v for v, c in enumerate(colors) if c == "B"]

    def split(k):
        return GraphLabel(tuple(k[v] for v in a), tuple(k[v] for v in b))

    def join(lab):
        out = [0] * len(colors)
        for v, bit in zip(a, lab.mu):
            out[v] = bit
        for v, bit in zip(b, lab.nu):
            out[v] = bit
        return tuple(out)

    x, y = rule(split(k1), split(k2))
    return join(x), join(y)


def u1_kappa(colors, k1, k2):
    return _on_kappa(u1_apply, colors, k1, k2)


def u2_kappa(colors, k1, k2):
    return _on_kappa(u2_apply, colors, k1, k2)


class Readout(NamedTuple):
    revealed: tuple
    xi: tuple
    zeta: tuple


def _readout(label_bits, graph, x_vertices, z_vertices, rng) -> Readout:
    rng = np.random.default_rng(rng)
    zeta = tuple(int(b) for b in rng.integers(0, 2, size=len(z_vertices)))
    zmap = dict(zip(z_vertices, zeta))
    xi = []
    for v, bit in zip(x_vertices, label_bits):
        s = sum(zmap[u] for u in graph.neighbors(v) if u in zmap)
        xi.append((int(bit) + s) % 2)
    return Readout(tuple(int(b) for b in label_bits), tuple(xi), zeta)


def m1_readout(label: GraphLabel, graph: TwoColorableGraph, rng=None) -> Readout:
    """Color A in X, color B in Z; ``mu_i = xi_i + sum of zeta over neighbours``."""
    return _readout(label.mu, graph, graph.a_vertices, graph.b_vertices, rng)


def m2_readout(label: GraphLabel, graph: TwoColorableGraph, rng=None) -> Readout:
    return _readout(label.nu, graph, graph.b_vertices, graph.a_vertices, rng)


def reconstruct(readout: Readout, graph: TwoColorableGraph, which: int) -> tuple:
    xs, zs = (graph.a_vertices, graph.b_vertices) if which == 1 else (graph.b_vertices, graph.a_vertices)
    zmap = dict(zip(zs, readout.zeta))
    return tuple((x + sum(zmap[u] for u in graph.neighbors(v) if u in zmap)) % 2 for v, x in zip(xs, readout.xi))


@dataclass(frozen=True)
class GraphDiagonal:
    """Dense graph-basis weights; ``lam[k0, ..., k_{N-1}]`` is the weight of ``kappa``."""

    lam: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.lam, dtype=np.float64)
        n = arr.ndim if arr.shape == (2,) * arr.ndim else None
        if n is None:
            size = arr.size
            n = int(round(math.log2(size))) if size else 0
            if size != 2 ** n or n < 1:
                raise ParameterError(f"lambda has {size} entries, not a power of two")
        if n > MAX_DENSE_VERTICES:
            raise ParameterError(f"dense lambda limited to {MAX_DENSE_VERTICES} vertices")
        flat = check_probability_vector(arr.ravel(), "lambda")
        out = flat.reshape((2,) * n)
        out.setflags(write=False)
        object.__setattr__(self, "lam", out)

    @property
    def n_vertices(self) -> int:
        return self.lam.ndim

    @property
    def flat(self) -> np.ndarray:
        return self.lam.ravel()

    @classmethod
    def pure(cls, n_vertices: int) -> "GraphDiagonal":
        lam = np.zeros((2,) * n_vertices)
        lam[(0,) * n_vertices] = 1.0
        return cls(lam)

    @classmethod
    def uniform(cls, n_vertices: int) -> "GraphDiagonal":
        return cls(np.full((2,) * n_vertices, 2.0 ** -n_vertices))


def product_lambda(flip: Sequence[float]) -> GraphDiagonal:
    """Independent bit flips: vertex ``j`` carries ``kappa_j = 1`` with probability ``flip[j]``."""
    lam = np.array([1.0])
    for f in flip:
        lam = np.multiply.outer(lam, np.array([1.0 - f, f])).ravel()
    return GraphDiagonal(lam.reshape((2,) * len(flip)))


def _check_graph(lam: GraphDiagonal, graph: TwoColorableGraph):
    if lam.n_vertices != graph.n_vertices:
        raise ParameterError(f"lambda has {lam.n_vertices} vertices, graph has {graph.n_vertices}")


def marginals(lam: GraphDiagonal, graph: TwoColorableGraph) -> tuple[np.ndarray, np.ndarray]:
    """Per-vertex bit distributions: rows ``(P[bit=0], P[bit=1])`` for A then B vertices."""
    _check_graph(lam, graph)
    axes = range(lam.n_vertices)

    def one(v):
        return lam.lam.sum(axis=tuple(a for a in axes if a != v))

    a = np.array([one(v) for v in graph.a_vertices]).reshape(-1, 2)
    b = np.array([one(v) for v in graph.b_vertices]).reshape(-1, 2)
    return a, b


def binary_entropy_rows(rows: np.ndarray) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(rows > 0, -rows * np.log2(np.where(rows > 0, rows, 1.0)), 0.0)
    return terms.sum(axis=-1)


def max_entropies(lam: GraphDiagonal, graph: TwoColorableGraph) -> tuple[float, float]:
    a, b = marginals(lam, graph)
    sa = float(binary_entropy_rows(a).max()) if len(a) else 0.0
    sb = float(binary_entropy_rows(b).max()) if len(b) else 0.0
    return sa, sb


def yield_from_entropies(n: int, s_a: float, s_b: float, delta: float) -> tuple[int, bool]:
    """``floor(n (1 - S_a - S_b - 2 delta))`` with a zero-yield flag."""
    return hashing_yield(n, s_a + s_b, delta)


def multiparty_yield(lam: GraphDiagonal, graph: TwoColorableGraph, n: int, delta: float) -> tuple[int, bool]:
    s_a, s_b = max_entropies(lam, graph)
    return yield_from_entropies(n, s_a, s_b, delta)


def mix_identity(lam: GraphDiagonal, eps_mix: float = 1e-3) -> GraphDiagonal:
    if not 0.0 < float(eps_mix) < 1.0:
        raise ParameterError(f"eps_mix={eps_mix!r} outside (0, 1)")
    return GraphDiagonal((1.0 - eps_mix) * lam.lam + eps_mix / lam.lam.size)
