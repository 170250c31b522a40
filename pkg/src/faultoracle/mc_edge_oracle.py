"""Monte Carlo edge-failure oracle: prefix sketches over one Euler order, on-demand Borůvka."""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

from .graph_core import Graph, UnionFind, euler_first_occurrence, spanning_forest
from .range_store import split_intervals
from .sketch_core import U64, SampleOracle, deepest_nonzero, single_edge_sketches

_M64 = (1 << 64) - 1


class Feistel:
    """Keyed permutation of b-bit integers (b even), four multiply-shift rounds.

    >>> f = Feistel(16, np.random.default_rng(1))
    >>> all(f.inverse(f.forward(x)) == x for x in range(0, 65536, 997))
    True
    """

    def __init__(self, bits: int, rng: np.random.Generator, rounds: int = 4):
        if bits % 2 or not 2 <= bits <= 64:
            raise ValueError("bits must be even and in [2, 64]")
        self.bits, self.half = bits, bits // 2
        self.mask = (1 << self.half) - 1
        self.keys = [(int(a) | 1, int(b)) for a, b in rng.integers(0, 2**64, size=(rounds, 2), dtype=U64)]

    def _f(self, k: int, x: int) -> int:
        a, b = self.keys[k]
        return (((a * x + b) & _M64) >> (64 - self.half)) & self.mask

    def forward(self, x: int) -> int:
        left, right = x >> self.half, x & self.mask
        for k in range(len(self.keys)):
            left, right = right, left ^ self._f(k, right)
        return (left << self.half) | right

    def inverse(self, y: int) -> int:
        left, right = y >> self.half, y & self.mask
        for k in reversed(range(len(self.keys))):
            left, right = right ^ self._f(k, left), left
        return (left << self.half) | right


def label_bits(n: int, c: int) -> int:
    b = c * max(1, math.ceil(math.log2(max(n, 2))))
    b += b % 2
    return max(2, min(64, b))


class MCEdgeOracle:
    """Connectivity under edge failures.

    ``strict=True`` validates recovered names by decoding only (no edge set
    lookup), checked mode also requires the edge to exist and not be deleted.
    """

    def __init__(self, g: Graph, seed: int = 0, c: int = 4, strict: bool = False):
        self.g, self.seed, self.c, self.strict = g, int(seed), c, strict
        self.sampler = SampleOracle(self.seed, g.n, g.m, c)
        rng = np.random.default_rng(np.random.SeedSequence([self.seed & _M64, 0xF1E1]))
        self.bits = label_bits(g.n, c)
        self.perm = Feistel(self.bits, rng)
        self.phi = [self.perm.forward(v) for v in range(g.n)]
        self.phi_inv = None if strict else {x: v for v, x in enumerate(self.phi)}
        forest = spanning_forest(g)
        self.tree_of = [0] * g.n
        self.orders, self.base = {}, {}
        order = []
        for r in forest.roots:
            eo = euler_first_occurrence(forest, r)
            self.orders[r] = eo
            self.base[r] = len(order)
            for v in eo.order:
                self.tree_of[v] = r
            order.extend(eo.order)
        self.order = order
        self.pos = [0] * g.n
        for k, v in enumerate(order):
            self.pos[v] = k
        R, C = self.sampler.rows, self.sampler.cols
        per_vertex = np.zeros((g.n, R, C, 2), dtype=U64)
        if g.m:
            names = self.names_of(g.edges)
            sk = single_edge_sketches(self.sampler.edge_levels(g.edges), names, R)
            ends = np.asarray(g.edges, dtype=np.int64)
            posarr = np.asarray(self.pos, dtype=np.int64)
            np.bitwise_xor.at(per_vertex, posarr[ends[:, 0]], sk)
            np.bitwise_xor.at(per_vertex, posarr[ends[:, 1]], sk)
        self.mu = np.zeros((g.n + 1, R, C, 2), dtype=U64)
        if g.n:
            self.mu[1:] = np.bitwise_xor.accumulate(per_vertex, axis=0)
        self.probe_cap = math.ceil(math.log2(R)) + 1 if R > 1 else 1

    def names_of(self, pairs) -> np.ndarray:
        out = np.zeros((len(pairs), 2), dtype=U64)
        for k, (u, v) in enumerate(pairs):
            a, b = self.phi[u], self.phi[v]
            out[k] = (min(a, b), max(a, b))
        return out

    def decode(self, lane0: int, lane1: int):
        """(u, v) if both lanes are labels of vertices and ordered; else None."""
        if lane0 >= lane1 or lane1 >> self.bits:
            return None
        if self.phi_inv is not None:
            u, v = self.phi_inv.get(lane0), self.phi_inv.get(lane1)
            if u is None or v is None:
                return None
        else:
            u, v = self.perm.inverse(lane0), self.perm.inverse(lane1)
            if u >= self.g.n or v >= self.g.n:
                return None
        return u, v

    def delete(self, D) -> "EdgeSession":
        return update_edges(self, D)

    def snapshot_arrays(self) -> dict:
        return {"mu": self.mu}


@dataclass
class EdgeSession:
    oracle: MCEdgeOracle
    D: list
    isets: dict
    uf: UnionFind
    index: dict
    status: str = "ok"
    rounds: int = 0
    stats: dict = field(default_factory=dict)

    def interval_id(self, v: int):
        r = self.oracle.tree_of[v]
        iset = self.isets.get(r)
        if iset is None:
            return None
        k = bisect_right(iset.lefts, self.oracle.orders[r].position[v]) - 1
        return self.index[(r, k)]

    def label(self, v: int):
        k = self.interval_id(v)
        if k is None:
            return ("tree", self.oracle.tree_of[v])
        return ("part", self.uf.find(k))

    def query(self, u: int, v: int) -> bool:
        return query_edges(self, u, v)


def update_edges(o: MCEdgeOracle, D) -> EdgeSession:
    g = o.g
    D = [(min(a, b), max(a, b)) for a, b in D]
    for a, b in D:
        if not (0 <= a < g.n and 0 <= b < g.n) or a == b:
            raise ValueError(f"({a}, {b}) is not a vertex pair")
    if len(set(D)) != len(D):
        raise ValueError("duplicate edge in D")
    if not o.strict:
        for a, b in D:
            if not g.has_edge(a, b):
                raise ValueError(f"({a}, {b}) is not an edge")
    cuts: dict = {}
    touched = set()
    for a, b in D:
        touched.update((o.tree_of[a], o.tree_of[b]))
        r = o.tree_of[a]
        eo = o.orders[r]
        pa, pb = eo.position.get(a), eo.position.get(b)
        if pb is not None and (eo.parent_pos[pb] == pa or eo.parent_pos[pa] == pb):
            cuts.setdefault(r, []).append((a, b))
    isets = {r: split_intervals(o.orders[r], (), cuts.get(r, ()), tree=r) for r in sorted(touched)}
    index: dict = {}
    members_mu: list = []
    for r, iset in isets.items():
        base = o.base[r]
        for k in range(len(iset)):
            index[(r, k)] = len(index)
            members_mu.append([base + iset.rights[k] + 1, base + iset.lefts[k]])
    s = EdgeSession(o, D, isets, UnionFind(len(index)), index)
    members_edge: list = [[] for _ in index]
    for e, (a, b) in enumerate(D):
        members_edge[s.interval_id(a)].append(e)
        members_edge[s.interval_id(b)].append(e)
    # each interval is one subtree piece; tree edges inside a subtree still join intervals of it
    for r, iset in isets.items():
        first: dict = {}
        for k, lab in enumerate(iset.labels):
            if lab in first:
                s.uf.union(first[lab], index[(r, k)])
            else:
                first[lab] = index[(r, k)]
    d_set = set(D)
    d_names = o.names_of(D) if D else np.zeros((0, 2), dtype=U64)
    d_lev = o.sampler.edge_levels(D) if D else np.zeros((0, o.sampler.cols), np.int8)
    groups: dict = {}
    for i in range(len(index)):
        root = s.uf.find(i)
        grp = groups.setdefault(root, ([], [], []))
        grp[0].extend(members_mu[i])
        grp[1].extend(members_edge[i])
        grp[2].append(i)
    n_mu = sum(len(x) for x in members_mu)
    n_edge = sum(len(x) for x in members_edge)
    lsize = n_mu + n_edge
    if lsize != 2 * len(index) + 2 * len(D):
        raise AssertionError(f"sketch list holds {lsize} entries, expected {2 * len(index) + 2 * len(D)}")
    probes = {"mu": np.zeros(o.mu.shape[0], dtype=np.int64)}
    per_member = [0] * len(index)  # probes charged to the basic sketches of interval i
    stats = {"d": len(D), "tree_cuts": sum(len(x) for x in cuts.values()), "intervals": len(index),
             "list_size": lsize, "probes": 0, "rejected": 0, "false_validations": 0, "recovered": 0}
    active = dict(groups)
    rounds = 0
    R, C = o.sampler.rows, o.sampler.cols
    mu = o.mu
    for j in range(C):
        if not active:
            break
        rounds += 1
        picks = []
        for root, (mus, es, ivs) in list(active.items()):
            idx = np.asarray(mus, dtype=np.int64)
            elev = d_lev[es, j] if es else None

            def entry(i, idx=idx, es=es, elev=elev):
                val = np.bitwise_xor.reduce(mu[idx, i, j], axis=0)
                if es:
                    sel = [e for e, lv in zip(es, elev) if lv >= i]
                    if sel:
                        val = val ^ np.bitwise_xor.reduce(d_names[sel], axis=0)
                return val

            k, p = deepest_nonzero(entry, R)
            stats["probes"] += p * (len(mus) + len(es))
            for i in ivs:
                per_member[i] += p
            if k < 0:
                del active[root]
                continue
            cand = entry(k)
            hit = _validate(o, s, int(cand[0]), int(cand[1]), root, d_set)
            if hit is None:
                stats["rejected"] += 1
            else:
                picks.append(hit)
        for a, b in picks:
            x, y = s.uf.find(s.interval_id(a)), s.uf.find(s.interval_id(b))
            if x == y:
                continue
            s.uf.union(x, y)
            keep = s.uf.find(x)
            gone = y if keep == x else x
            stats["recovered"] += 1
            ga, gb = groups[keep], groups.pop(gone)
            for t in range(3):
                ga[t].extend(gb[t])
            active.pop(gone, None)
            active[keep] = ga
    s.status = "detected-failure" if active else "ok"
    s.rounds = rounds
    stats["rounds"] = rounds
    stats["status"] = s.status
    stats["max_member_probes"] = max(per_member, default=0)
    stats["probe_budget"] = rounds * o.probe_cap
    s.stats = stats
    return s


def _validate(o: MCEdgeOracle, s: EdgeSession, lane0: int, lane1: int, root: int, D):
    uv = o.decode(lane0, lane1)
    if uv is None:
        return None
    u, v = uv
    real = o.g.has_edge(u, v) != ((min(u, v), max(u, v)) in D)
    if not o.strict and not real:
        return None
    iu, iv = s.interval_id(u), s.interval_id(v)
    if iu is None or iv is None:
        return None
    if (s.uf.find(iu) == root) == (s.uf.find(iv) == root):
        return None
    if not real:
        s.stats["false_validations"] += 1
    return u, v


def query_edges(s: EdgeSession, u: int, v: int) -> bool:
    if u == v:
        return True
    return s.label(u) == s.label(v)
