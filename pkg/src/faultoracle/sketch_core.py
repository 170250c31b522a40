"""XOR sketch kernels shared by the Monte Carlo oracles.

Names are two uint64 lanes. An original edge ``{u, v}`` with ``u < v`` is
``(u << 32 | v, 1)``; an artificial edge ``<u, v, gamma>`` with ``u`` from the
adjacency list and ``v`` from the sampled subset is ``(u << 32 | v, gamma << 32 | 2)``.
The all-zero pair means "empty".

A 2D sketch has shape ``(rows, cols, 2)`` and entry ``(i, j)`` holds the XOR of
names whose column-j edge level is at least i. A 4D sketch has shape
``(L, L, L, cols, 2)`` with axes ``(i_a, i_b, i_c, j)``; an artificial name is in
cell ``(i_a, i_b, i_c, j)`` when its first endpoint, second endpoint and
provenance have column-j levels at least ``i_a``, ``i_b``, ``i_c``.
"""

from __future__ import annotations

import math
from typing import Callable, Iterable

import numpy as np

MASK32 = (1 << 32) - 1
TAG_ORIGINAL = 1
TAG_ARTIFICIAL = 2
U64 = np.uint64


class EncodingError(ValueError):
    pass


def original_name(u: int, v: int) -> tuple[int, int]:
    if u == v or min(u, v) < 0 or max(u, v) > MASK32:
        raise EncodingError(f"({u}, {v}) is not a legal original edge")
    if u > v:
        u, v = v, u
    return (u << 32) | v, TAG_ORIGINAL


def artificial_name(u: int, v: int, gamma: int) -> tuple[int, int]:
    if u == v or min(u, v, gamma) < 0 or max(u, v, gamma) > MASK32:
        raise EncodingError(f"({u}, {v}, {gamma}) is not a legal artificial edge")
    return (u << 32) | v, (gamma << 32) | TAG_ARTIFICIAL


def decode_name(lane0: int, lane1: int):
    """('original', u, v), ('artificial', u, v, gamma) or None for anything else."""
    lane0, lane1 = int(lane0), int(lane1)
    u, v = lane0 >> 32, lane0 & MASK32
    tag, gamma = lane1 & MASK32, lane1 >> 32
    if tag == TAG_ORIGINAL and gamma == 0 and u < v:
        return ("original", u, v)
    if tag == TAG_ARTIFICIAL and u != v:
        return ("artificial", u, v, gamma)
    return None


def clz32(h: np.ndarray) -> np.ndarray:
    """Leading zeros of 32-bit values held in uint64; 32 for zero."""
    h = np.asarray(h, dtype=U64)
    _, e = np.frexp(h.astype(np.float64))
    return (32 - e).astype(np.int64)


class HashFamily:
    """One vector multiply-add-shift function per column, 32-bit keys chunks to 32-bit values.

    ``h_j(x) = ((sum_k a_jk * x_k + b_j) mod 2**64) >> 32``.
    """

    def __init__(self, rng: np.random.Generator, cols: int, chunks: int):
        self.cols, self.chunks = cols, chunks
        self.a = rng.integers(0, 2**64, size=(cols, chunks), dtype=U64, endpoint=False)
        self.b = rng.integers(0, 2**64, size=cols, dtype=U64, endpoint=False)

    def __call__(self, keys) -> np.ndarray:
        keys = np.asarray(keys, dtype=U64).reshape(-1, self.chunks)
        acc = np.broadcast_to(self.b, (len(keys), self.cols)).copy()
        for k in range(self.chunks):
            acc += keys[:, k : k + 1] * self.a[None, :, k]
        return acc >> U64(32)


class SampleOracle:
    """Seeded nested sampling for edges (2D) and for vertices and components (4D).

    ``edge_levels`` returns, per column, the deepest row holding the edge; all
    shallower rows hold it too, so membership is nested by construction.
    """

    def __init__(self, seed: int, n: int, m: int, c: int = 4):
        if c < 1:
            raise ValueError("c must be >= 1")
        self.seed, self.n, self.m, self.c = int(seed), n, m, c
        self.rows = max(1, math.ceil(math.log2(max(m, 1))))
        self.levels = max(1, math.ceil(math.log2(max(n, 1))))
        self.cols = max(1, c * math.ceil(math.log2(max(n, 2))))
        ss = np.random.SeedSequence([self.seed & (2**64 - 1), 0x5EED])
        e_rng, a_rng, b_rng, c_rng = (np.random.default_rng(s) for s in ss.spawn(4))
        self._he = HashFamily(e_rng, self.cols, 2)
        self._ha = HashFamily(a_rng, self.cols, 1)
        self._hb = HashFamily(b_rng, self.cols, 1)
        self._hc = HashFamily(c_rng, self.cols, 1)

    def edge_levels(self, pairs) -> np.ndarray:
        pairs = np.asarray(pairs, dtype=U64).reshape(-1, 2)
        lo, hi = np.minimum(pairs[:, 0], pairs[:, 1]), np.maximum(pairs[:, 0], pairs[:, 1])
        lev = clz32(self._he(np.stack([lo, hi], axis=1)))
        return np.minimum(lev, self.rows - 1).astype(np.int8)

    def a_levels(self, vs) -> np.ndarray:
        return np.minimum(clz32(self._ha(vs)), self.levels - 1).astype(np.int8)

    def b_levels(self, vs) -> np.ndarray:
        return np.minimum(clz32(self._hb(vs)), self.levels - 1).astype(np.int8)

    def c_levels(self, cs) -> np.ndarray:
        return np.minimum(clz32(self._hc(cs)), self.levels - 1).astype(np.int8)

    def in_edge_sample(self, u: int, v: int, i: int, j: int) -> bool:
        return bool(self.edge_levels([(u, v)])[0, j] >= i)

    def in_a(self, v: int, i: int, j: int) -> bool:
        return bool(self.a_levels([v])[0, j] >= i)

    def in_b(self, v: int, i: int, j: int) -> bool:
        return bool(self.b_levels([v])[0, j] >= i)

    def in_c(self, gamma: int, i: int, j: int) -> bool:
        return bool(self.c_levels([gamma])[0, j] >= i)

    def zero2d(self) -> np.ndarray:
        return np.zeros((self.rows, self.cols, 2), dtype=U64)

    def zero4d(self) -> np.ndarray:
        L = self.levels
        return np.zeros((L, L, L, self.cols, 2), dtype=U64)


def sketch_xor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape != b.shape:
        raise ValueError(f"sketch shapes differ: {a.shape} vs {b.shape}")
    return a ^ b


def names_array(names: Iterable[tuple[int, int]]) -> np.ndarray:
    out = np.array(list(names), dtype=U64)
    return out.reshape(-1, 2)


def single_edge_sketches(levels: np.ndarray, names: np.ndarray, rows: int) -> np.ndarray:
    """Stack of 2D sketches, one per edge: entry (i, j) = name if levels[j] >= i."""
    mask = np.arange(rows)[None, :, None] <= levels[:, None, :]
    return np.where(mask[..., None], names[:, None, None, :], U64(0))


def sketch_edges(edges: Iterable[tuple[int, int]], oracle: SampleOracle) -> np.ndarray:
    """2D sketch of a set of original edges (duplicates cancel)."""
    edges = list(edges)
    out = oracle.zero2d()
    if not edges:
        return out
    names = names_array(original_name(u, v) for u, v in edges)
    lev = oracle.edge_levels(edges)
    return np.bitwise_xor.reduce(single_edge_sketches(lev, names, oracle.rows), axis=0) ^ out


def cube_from_names(names: np.ndarray, la: np.ndarray, lb: np.ndarray, lc: np.ndarray, L: int) -> np.ndarray:
    """4D sketch (all columns) from per-name column levels, shape (L, L, L, cols, 2)."""
    cols = la.shape[1] if la.ndim == 2 else 1
    cube = np.zeros((L, L, L, cols, 2), dtype=U64)
    if len(names):
        jj = np.broadcast_to(np.arange(cols), la.shape)
        flat = ((la.astype(np.int64) * L + lb) * L + lc) * cols + jj
        view = cube.reshape(-1, 2)
        for lane in (0, 1):
            np.bitwise_xor.at(view[:, lane], flat.ravel(), np.repeat(names[:, lane], cols))
    return _suffix3(cube)


def column_cube(names: np.ndarray, la: np.ndarray, lb: np.ndarray, lc: np.ndarray, L: int) -> np.ndarray:
    """One column of a 4D sketch, shape (L, L, L, 2); levels are 1D per name."""
    cube = np.zeros((L * L * L, 2), dtype=U64)
    if len(names):
        flat = (la.astype(np.int64) * L + lb) * L + lc
        for lane in (0, 1):
            np.bitwise_xor.at(cube[:, lane], flat, names[:, lane])
    return _suffix3(cube.reshape(L, L, L, 2))


def _suffix3(cube: np.ndarray) -> np.ndarray:
    for ax in range(3):
        cube = np.flip(np.bitwise_xor.accumulate(np.flip(cube, ax), axis=ax), ax)
    return np.ascontiguousarray(cube)


def sketch_artificial(edges: Iterable[tuple[int, int, int]], oracle: SampleOracle) -> np.ndarray:
    """4D sketch of a set of artificial edges ``(u, v, gamma)``."""
    edges = list(edges)
    if not edges:
        return oracle.zero4d()
    names = names_array(artificial_name(u, v, g) for u, v, g in edges)
    arr = np.array(edges, dtype=np.int64)
    la = oracle.a_levels(arr[:, 0])
    lb = oracle.b_levels(arr[:, 1])
    lc = oracle.c_levels(arr[:, 2])
    return cube_from_names(names, la, lb, lc, oracle.levels)


def _nonzero(x) -> bool:
    return bool(x[0]) or bool(x[1])


def deepest_nonzero(probe: Callable[[int], tuple], size: int) -> tuple[int, int]:
    """Binary search for the last nonzero index, assuming nonzero entries form a prefix.

    Returns (index or -1, probes).
    """
    lo, hi, probes = -1, size, 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        probes += 1
        if _nonzero(probe(mid)):
            lo = mid
        else:
            hi = mid
    return lo, probes


def search_column(col: np.ndarray, validator: Callable, counter: list | None = None):
    """Recover a validated name from one 2D column ``(rows, 2)`` by binary search on the deepest nonzero row.

    Row 0 is not trusted to be nonzero: structured names can cancel there.
    """
    k, probes = deepest_nonzero(lambda i: col[i], len(col))
    found = None
    if k >= 0:
        cand = col[k]
        if validator(int(cand[0]), int(cand[1])):
            found = (int(cand[0]), int(cand[1]))
    if counter is not None:
        counter[0] += probes
    return found


def search_cube(cube: np.ndarray, validator: Callable, counter: list | None = None):
    """Recover a validated name from one 4D column ``(L, L, L, 2)``: search i_c, then i_a, then i_b.

    Each step asks whether the whole remaining slab is nonzero, so a corner
    entry that cancels (structured names XOR to zero easily) does not end the search.
    """
    L = cube.shape[0]
    ic, p1 = deepest_nonzero(lambda i: _any2(cube[:, :, i]), L)
    probes = p1
    found = None
    if ic >= 0:
        ia, p2 = deepest_nonzero(lambda i: _any2(cube[i, :, ic]), L)
        ib, p3 = deepest_nonzero(lambda i: cube[ia, i, ic], L)
        probes += p2 + p3
        if ib >= 0:
            cand = cube[ia, ib, ic]
            if validator(int(cand[0]), int(cand[1])):
                found = (int(cand[0]), int(cand[1]))
    if counter is not None:
        counter[0] += probes
    return found


def _any2(x: np.ndarray) -> tuple[bool, bool]:
    return bool(x[..., 0].any()), bool(x[..., 1].any())


def recover_edge(m: np.ndarray, j: int, validator: Callable, counter: list | None = None):
    return search_column(m[:, j], validator, counter)


def recover_edge_4d(m: np.ndarray, j: int, validator: Callable, counter: list | None = None):
    return search_cube(m[:, :, :, j], validator, counter)


def scan_column(col: np.ndarray, validator: Callable):
    """Deepest-first linear scan of a 2D column; first validated name or None."""
    for i in range(len(col) - 1, -1, -1):
        if _nonzero(col[i]) and validator(int(col[i][0]), int(col[i][1])):
            return int(col[i][0]), int(col[i][1])
    return None
