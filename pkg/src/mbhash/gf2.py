"""
Dense GF(2) linear algebra on bit-packed rows.

A vector of ``nbits`` bits is stored as ``words(nbits)`` little-endian
``uint64`` words: bit ``b`` lives in word ``b // 64`` at position ``b % 64``.
A matrix is a 2-D array of shape ``(rows, words)``.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

ONE = np.uint64(1)


def words(nbits: int) -> int:
    return max(1, (int(nbits) + 63) // 64)


def pack(bits) -> np.ndarray:
    """Pack a ``(..., nbits)`` 0/1 array into ``(..., words)`` uint64."""
    bits = np.asarray(bits, dtype=np.uint8)
    nbits = bits.shape[-1]
    pad = words(nbits) * 64 - nbits
    if pad:
        bits = np.concatenate([bits, np.zeros(bits.shape[:-1] + (pad,), dtype=np.uint8)], axis=-1)
    packed = np.packbits(bits, axis=-1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64)


def unpack(rows, nbits: int) -> np.ndarray:
    rows = np.ascontiguousarray(np.asarray(rows, dtype=np.uint64).astype("<u8"))
    as_bytes = rows.view(np.uint8)
    return np.unpackbits(as_bytes, axis=-1, bitorder="little")[..., :nbits]


def get_bit(rows, b: int) -> np.ndarray:
    w, k = divmod(int(b), 64)
    return ((np.asarray(rows)[..., w] >> np.uint64(k)) & ONE).astype(np.uint8)


def unit(b: int, nbits: int) -> np.ndarray:
    v = np.zeros(words(nbits), dtype=np.uint64)
    w, k = divmod(int(b), 64)
    v[w] = ONE << np.uint64(k)
    return v


def parity(rows, x) -> np.ndarray:
    """Inner products ``<row, x>`` over GF(2), broadcasting over leading axes."""
    both = np.bitwise_and(np.asarray(rows, dtype=np.uint64), np.asarray(x, dtype=np.uint64))
    return (np.bitwise_count(both).sum(axis=-1, dtype=np.int64) & 1).astype(np.uint8)


def popcount(x) -> np.ndarray:
    return np.bitwise_count(np.asarray(x, dtype=np.uint64)).sum(axis=-1, dtype=np.int64)


class Echelon(NamedTuple):
    rows: np.ndarray
    rhs: np.ndarray
    pivots: tuple[int, ...]
    consistent: bool

    @property
    def rank(self) -> int:
        return len(self.pivots)


def rref(rows, nbits: int, rhs=None) -> Echelon:
    """Reduced row echelon form, carrying an optional right-hand side along."""
    a = np.array(rows, dtype=np.uint64, copy=True).reshape(-1, words(nbits))
    b = np.zeros(a.shape[0], dtype=np.uint8) if rhs is None else np.array(rhs, dtype=np.uint8, copy=True)
    pivots = []
    r = 0
    nrows = a.shape[0]
    for col in range(nbits):
        if r == nrows:
            break
        w, k = divmod(col, 64)
        colbits = (a[r:, w] >> np.uint64(k)) & ONE
        hits = np.flatnonzero(colbits)
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            a[[r, p]] = a[[p, r]]
            b[[r, p]] = b[[p, r]]
        mask = ((a[:, w] >> np.uint64(k)) & ONE).astype(bool)
        mask[r] = False
        a[mask] ^= a[r]
        b[mask] ^= b[r]
        pivots.append(col)
        r += 1
    consistent = not bool(np.any(b[r:]))
    return Echelon(a[:r], b[:r], tuple(pivots), consistent)


def rank(rows, nbits: int) -> int:
    return rref(rows, nbits).rank


def particular_solution(ech: Echelon, nbits: int) -> np.ndarray:
    """Solution with all free variables zero; requires a consistent system."""
    if not ech.consistent:
        raise ValueError("inconsistent GF(2) system")
    x = np.zeros(words(nbits), dtype=np.uint64)
    for row_bit, col in zip(ech.rhs, ech.pivots):
        if row_bit:
            x |= unit(col, nbits)
    return x


def nullspace(ech: Echelon, nbits: int) -> np.ndarray:
    """Basis of the kernel as a ``(nbits - rank, words)`` array."""
    pivot_set = set(ech.pivots)
    free = [c for c in range(nbits) if c not in pivot_set]
    basis = np.zeros((len(free), words(nbits)), dtype=np.uint64)
    for i, f in enumerate(free):
        basis[i] = unit(f, nbits)
        if ech.rank:
            hit = get_bit(ech.rows, f).astype(bool)
            for row_index in np.flatnonzero(hit):
                basis[i] |= unit(ech.pivots[row_index], nbits)
    return basis


def span(offset, basis) -> np.ndarray:
    """All ``2**len(basis)`` vectors ``offset + combination of basis``."""
    out = np.asarray(offset, dtype=np.uint64)[None, :].copy()
    for v in np.asarray(basis, dtype=np.uint64):
        out = np.concatenate([out, out ^ v[None, :]], axis=0)
    return out
