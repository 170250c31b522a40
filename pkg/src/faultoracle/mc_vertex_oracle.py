"""Monte Carlo vertex-failure oracle built on XOR sketches of original and artificial edges."""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .det_oracle import FailureSession, affected_of, check_failures, split_affected
from .graph_core import Graph, UnionFind
from .hierarchy import Hierarchy, build_hierarchy
from .sketch_core import (
    TAG_ARTIFICIAL,
    U64,
    SampleOracle,
    column_cube,
    cube_from_names,
    decode_name,
    search_column,
    search_cube,
    single_edge_sketches,
)


class BudgetError(RuntimeError):
    pass


@dataclass
class BSets:
    sampled: list  # per component, sampled subset in adjacency-list order
    owner: dict  # canonical pair -> owning component
    owned: list  # pairs labeled per component
    budget: float

    def owned_total(self) -> int:
        return len(self.owner)


def select_bsets(h: Hierarchy, c: int = 4, seed: int = 0) -> BSets:
    """Sample B-sets in component-id order, labeling each newly covered pair with its owner."""
    n = h.g.n
    ln_n = math.log(max(n, 2))
    rng = np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), 0xB5E7]))
    owner: dict = {}
    sampled, owned = [], []
    budget = 0.0
    for comp in h.components:
        A = h.adjacency[comp.id].items
        k = len(A)
        draws = rng.random(k)
        if k <= 1:
            sampled.append(list(A))
            owned.append(0)
            continue
        fresh = sum(1 for x in range(k) for y in range(x + 1, k) if _pair(A[x], A[y]) not in owner)
        prob = 1.0 if fresh == 0 else min(1.0, k * c * ln_n / fresh)
        B = [A[x] for x in range(k) if draws[x] < prob]
        got = 0
        for u in A:
            for v in B:
                if u != v:
                    key = _pair(u, v)
                    if key not in owner:
                        owner[key] = comp.id
                        got += 1
        sampled.append(B)
        owned.append(got)
        budget += 2 * k * c * ln_n
    if len(owner) > 10 * max(budget, 1.0):
        raise BudgetError(f"{len(owner)} owned pairs exceed 10x the expected budget {budget:.0f}")
    return BSets(sampled, owner, owned, budget)


def _pair(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


class PrefixLists:
    """Many sorted lists of 2D sketches stored as one XOR-prefix array.

    List ``k`` occupies prefix rows ``off[k] .. off[k] + len``; row ``off[k] + i``
    is the XOR of the first ``i`` entries.
    """

    def __init__(self, lists: list, entries: np.ndarray, rows: int, cols: int):
        # lists: [(sorted keys, entry row indices into `entries`)]
        self.keys = []
        self.off = []
        total = sum(len(k) + 1 for k, _ in lists)
        stack = np.zeros((total, rows, cols, 2), dtype=U64)
        pos = 0
        starts = np.zeros(total, dtype=np.int64)
        for keys, idx in lists:
            self.keys.append(list(keys))
            self.off.append(pos)
            if len(idx):
                stack[pos + 1 : pos + 1 + len(idx)] = entries[idx]
            starts[pos : pos + len(keys) + 1] = pos
            pos += len(keys) + 1
        acc = np.bitwise_xor.accumulate(stack, axis=0) if total else stack
        self.prefix = acc ^ acc[starts] if total else acc

    def rows_for(self, k: int, lo: int, hi: int):
        keys = self.keys[k]
        a, b = bisect_left(keys, lo), bisect_left(keys, hi)
        if a == b:
            return None
        return self.off[k] + a, self.off[k] + b


class NameTable:
    """Artificial names with per-column levels, plus CSR lists grouped by owner and sorted by key."""

    def __init__(self, first, second, prov, oracle: SampleOracle, alev, blev, clev):
        self.first = np.asarray(first, dtype=np.int64)
        self.second = np.asarray(second, dtype=np.int64)
        self.prov = np.asarray(prov, dtype=np.int64)
        self.names = np.zeros((len(self.first), 2), dtype=U64)
        self.names[:, 0] = (self.first.astype(U64) << U64(32)) | self.second.astype(U64)
        self.names[:, 1] = (self.prov.astype(U64) << U64(32)) | U64(TAG_ARTIFICIAL)
        self.la = alev[self.first] if len(self.first) else np.zeros((0, oracle.cols), np.int8)
        self.lb = blev[self.second] if len(self.second) else np.zeros((0, oracle.cols), np.int8)
        self.lc = clev[self.prov] if len(self.prov) else np.zeros((0, oracle.cols), np.int8)

    def __len__(self) -> int:
        return len(self.first)


class CSRLists:
    def __init__(self, owners: np.ndarray, keys: np.ndarray, idx: np.ndarray, n_owners: int):
        order = np.lexsort((keys, owners))
        self.owners = owners[order]
        self.keys = keys[order]
        self.idx = idx[order]
        self.start = np.searchsorted(self.owners, np.arange(n_owners + 1))

    def slice_for(self, k: int, lo: int, hi: int):
        s, e = self.start[k], self.start[k + 1]
        if s == e:
            return None
        keys = self.keys[s:e]
        a, b = np.searchsorted(keys, lo), np.searchsorted(keys, hi)
        if a == b:
            return None
        return int(s + a), int(s + b)


class BipartiteSketch:
    """Generates 4D sketches of bipartite pieces of ``A x B`` for one component.

    Stores parity and name prefix matrices over ``A`` (vertex A-levels) and over
    ``B`` (vertex B-levels); failure-dependent parts are computed per failure set.
    """

    def __init__(self, gamma: int, A: list, B: list, oracle: SampleOracle, alev, blev, clev):
        L, C = oracle.levels, oracle.cols
        self.gamma, self.L, self.C = gamma, L, C
        self.A = list(A)
        where = {v: k for k, v in enumerate(self.A)}
        self.bpos = [where[v] for v in B]
        if self.bpos != sorted(self.bpos):
            raise ValueError("B must follow A's order")
        self.B = list(B)
        self.Aset, self.Bset = frozenset(A), frozenset(B)
        self.tag = U64((gamma << 32) | TAG_ARTIFICIAL)
        self.lc = clev[gamma]
        self.alev_all, self.blev_all = alev, blev
        self.par_a, self.name_a = _level_prefix(self.A, alev, L)
        self.par_b, self.name_b = _level_prefix(self.B, blev, L)

    def range_of(self, positions: list, base: int, l: int, r: int) -> tuple[int, int]:
        return base + bisect_left(positions, l), base + bisect_right(positions, r)

    def failure_parts(self, D) -> tuple:
        """Parity and name matrices of D within A (A-levels) and within B (B-levels)."""
        da = [v for v in D if v in self.Aset]
        db = [v for v in D if v in self.Bset]
        pa, na = _level_sum(da, self.alev_all, self.L, self.C)
        pb, nb = _level_sum(db, self.blev_all, self.L, self.C)
        return pa, na, pb, nb

    def _parts(self, k0: int, k1: int, dparts):
        pa_d, na_d, pb_d, nb_d = dparts
        b0, b1 = bisect_left(self.bpos, k0), bisect_left(self.bpos, k1)
        i_par = self.par_a[k1] ^ self.par_a[k0]
        i_name = self.name_a[k1] ^ self.name_a[k0]
        ib_par = self.par_b[b1] ^ self.par_b[b0]
        ib_name = self.name_b[b1] ^ self.name_b[b0]
        bd_par = self.par_b[-1] ^ pb_d
        bd_name = self.name_b[-1] ^ nb_d
        ad_par = self.par_a[-1] ^ pa_d
        ad_name = self.name_a[-1] ^ na_d
        return (i_par, i_name, bd_par, bd_name), (ad_par, ad_name, ib_par, ib_name)

    def _product(self, xp, xn, yp, yn) -> np.ndarray:
        # xp, xn index (i_a, ...), yp, yn index (i_b, ...)
        xp, yp = xp[:, None].astype(U64), yp[None, :].astype(U64)
        lane0 = ((xn[:, None] * yp) << U64(32)) | (yn[None, :] * xp)
        lane1 = self.tag * (xp & yp)
        return np.stack([lane0, lane1], axis=-1)

    def column(self, j: int, k0: int, k1: int, dparts) -> np.ndarray:
        """Column j of the sketch of ``I x (B-D)  xor  (A-D) x (I & B)`` with I = A[k0:k1]."""
        p0, p1 = self._parts(k0, k1, dparts)
        val = self._product(p0[0][:, j], p0[1][:, j], p0[2][:, j], p0[3][:, j])
        val ^= self._product(p1[0][:, j], p1[1][:, j], p1[2][:, j], p1[3][:, j])
        keep = (np.arange(self.L) <= self.lc[j])[None, None, :, None]
        return np.where(keep, val[:, :, None, :], U64(0))

    def full(self, k0: int, k1: int, dparts) -> np.ndarray:
        p0, p1 = self._parts(k0, k1, dparts)
        val = self._product(*p0) ^ self._product(*p1)  # (L, L, C, 2)
        keep = np.arange(self.L)[:, None] <= self.lc[None, :]  # (i_c, j)
        return np.where(keep[None, None, :, :, None], val[:, :, None, :, :], U64(0))

    def materialize(self, k0: int, k1: int, D) -> list:
        """Explicit names of the sketched edge set, for differential checks."""
        D = set(D)
        I = self.A[k0:k1]
        Iset = set(I)
        first = Counter((u, v) for u in I for v in self.B if v not in D and u != v)
        second = Counter((a, b) for a in self.A if a not in D for b in self.B if b in Iset and a != b)
        both = first + second
        return sorted((u, v, self.gamma) for (u, v), k in both.items() if k % 2)


def _level_prefix(vs: list, lev: np.ndarray, L: int):
    C = lev.shape[1]
    k = len(vs)
    par = np.zeros((k + 1, L, C), dtype=np.uint8)
    name = np.zeros((k + 1, L, C), dtype=U64)
    if k:
        arr = np.asarray(vs, dtype=np.int64)
        member = np.arange(L)[None, :, None] <= lev[arr][:, None, :]
        par[1:] = np.bitwise_xor.accumulate(member.astype(np.uint8), axis=0)
        name[1:] = np.bitwise_xor.accumulate(np.where(member, arr.astype(U64)[:, None, None], U64(0)), axis=0)
    return par, name


def _level_sum(vs: list, lev: np.ndarray, L: int, C: int):
    if not vs:
        return np.zeros((L, C), dtype=np.uint8), np.zeros((L, C), dtype=U64)
    par, name = _level_prefix(vs, lev, L)
    return par[-1], name[-1]


class MCVertexOracle:
    """Sketch-based connectivity under up to n vertex failures, correct with high probability."""

    def __init__(self, g: Graph, seed: int = 0, c: int = 4, hierarchy: Hierarchy | None = None, eager: bool = False):
        self.g, self.seed, self.c, self.eager = g, int(seed), c, eager
        self.h = hierarchy if hierarchy is not None else build_hierarchy(g)
        self.sampler = SampleOracle(self.seed, g.n, g.m, c)
        self.bsets = select_bsets(self.h, c, self.seed)
        build_structures(self)
        self.meta = {
            "p": self.h.p,
            "components": len(self.h.components),
            "owned_pairs": self.bsets.owned_total(),
            "owned_budget": round(self.bsets.budget, 3),
            "artificial_names": len(self.table),
            "rows": self.sampler.rows,
            "levels": self.sampler.levels,
            "cols": self.sampler.cols,
        }

    def delete(self, D) -> "MCSession":
        return update(self, D)

    def rank_range(self, t: int, l: int, r: int) -> tuple[int, int]:
        pos = self.term_pos[t]
        base = self.rank_base[t]
        return base + bisect_left(pos, l), base + bisect_right(pos, r)


def build_structures(o: MCVertexOracle) -> None:
    """Rank terminals Euler-consistently, then build the 2D prefix lists and the artificial-name tables."""
    g, h, smp = o.g, o.h, o.sampler
    n, C, R = g.n, smp.cols, smp.rows
    keyed = sorted(range(n), key=lambda v: h.principal(v))
    rank = [0] * n
    for k, v in enumerate(keyed):
        rank[v] = k
    o.rank = rank
    o.term_pos, o.rank_base = {}, {}
    for v in keyed:
        t, p = h.principal(v)
        if t not in o.term_pos:
            o.term_pos[t] = []
            o.rank_base[t] = rank[v]
        o.term_pos[t].append(p)
    o.hosted = {}
    for comp in h.components:
        o.hosted.setdefault(comp.tau, []).append(comp.id)

    # original edges
    if g.m:
        lev = smp.edge_levels(g.edges)
        names = np.zeros((g.m, 2), dtype=U64)
        arr = np.asarray(g.edges, dtype=U64)
        names[:, 0] = (arr[:, 0] << U64(32)) | arr[:, 1]
        names[:, 1] = U64(1)
        o.edge_sk = single_edge_sketches(lev, names, R)
    else:
        o.edge_sk = np.zeros((0, R, C, 2), dtype=U64)
    vlists = []
    for v in range(n):
        pairs = sorted((rank[w], e) for w, e in zip(g.adj[v], g.adj_edges[v]))
        vlists.append(([k for k, _ in pairs], [e for _, e in pairs]))
    o.V = PrefixLists(vlists, o.edge_sk, R, C)
    extra = []
    clists = []
    for comp in h.components:
        acc: dict = {}
        for x in comp.terminals:
            for w, e in zip(g.adj[x], g.adj_edges[x]):
                acc.setdefault(w, []).append(e)
        keys, rows = [], []
        for w in sorted(acc, key=rank.__getitem__):
            keys.append(rank[w])
            es = acc[w]
            if len(es) == 1:
                rows.append(es[0])
            else:
                rows.append(g.m + len(extra))
                extra.append(np.bitwise_xor.reduce(o.edge_sk[es], axis=0))
        clists.append((keys, rows))
    entries = np.concatenate([o.edge_sk, np.array(extra, dtype=U64).reshape(-1, R, C, 2)]) if extra else o.edge_sk
    o.Cl = PrefixLists(clists, entries, R, C)

    # artificial names
    verts = np.arange(n)
    alev = smp.a_levels(verts) if n else np.zeros((0, C), np.int8)
    blev = smp.b_levels(verts) if n else np.zeros((0, C), np.int8)
    ncomp = len(h.components)
    clev = smp.c_levels(np.arange(ncomp)) if ncomp else np.zeros((0, C), np.int8)
    o.alev, o.blev, o.clev = alev, blev, clev
    first, second, prov = [], [], []
    o.bip = {}
    for comp in h.components:
        A = h.adjacency[comp.id].items
        B = o.bsets.sampled[comp.id]
        if len(A) < 2 or not B:
            continue
        o.bip[comp.id] = BipartiteSketch(comp.id, A, B, smp, alev, blev, clev)
        for u in A:
            for v in B:
                if u != v:
                    first.append(u)
                    second.append(v)
                    prov.append(comp.id)
    o.table = NameTable(first, second, prov, smp, alev, blev, clev)
    N = len(o.table)
    idx = np.arange(N, dtype=np.int64)
    rk = np.asarray(rank, dtype=np.int64)
    home = np.asarray([h.home(v) for v in range(n)], dtype=np.int64)
    f, s = o.table.first, o.table.second
    o.Vh = CSRLists(np.concatenate([f, s]), np.concatenate([rk[s], rk[f]]) if N else np.zeros(0, np.int64), np.concatenate([idx, idx]), n)
    o.Ch = CSRLists(np.concatenate([home[s], home[f]]) if N else np.zeros(0, np.int64), np.concatenate([rk[f], rk[s]]) if N else np.zeros(0, np.int64), np.concatenate([idx, idx]), ncomp)
    # A-list segments per tree, for locating I & A(gamma)
    o.a_segments = {}
    for gid, bs in o.bip.items():
        seg: dict = {}
        for k, v in enumerate(bs.A):
            t, p = h.principal(v)
            if t not in seg:
                seg[t] = (k, [])
            seg[t][1].append(p)
        o.a_segments[gid] = seg


@dataclass
class IntervalRefs:
    rows: list = field(default_factory=list)  # (lo, hi) rows into V.prefix or Cl.prefix, tagged
    vrows: list = field(default_factory=list)
    tab: list = field(default_factory=list)  # (store, start, stop) slices of CSR idx
    bip: list = field(default_factory=list)  # (gamma, k0, k1)

    def count(self) -> int:
        return 2 * (len(self.rows) + len(self.vrows)) + len(self.tab) + len(self.bip)


@dataclass
class MCSession(FailureSession):
    status: str = "ok"
    rounds: int = 0
    refs: dict = field(default_factory=dict)


def interval_refs(o: MCVertexOracle, D, aff, zone: list, t: int, l: int, r: int) -> IntervalRefs:
    lo, hi = o.rank_range(t, l, r)
    ref = IntervalRefs()
    if lo == hi:
        return ref
    for gid in zone:
        rr = o.Cl.rows_for(gid, lo, hi)
        if rr:
            ref.rows.append(rr)
        sl = o.Ch.slice_for(gid, lo, hi)
        if sl:
            ref.tab.append(("C",) + sl)
    for v in D:
        rr = o.V.rows_for(v, lo, hi)
        if rr:
            ref.vrows.append(rr)
        sl = o.Vh.slice_for(v, lo, hi)
        if sl:
            ref.tab.append(("V",) + sl)
    for gid in aff:
        seg = o.a_segments.get(gid, {}).get(t)
        if seg is None:
            continue
        base, positions = seg
        k0, k1 = base + bisect_left(positions, l), base + bisect_right(positions, r)
        if k0 < k1:
            ref.bip.append((gid, k0, k1))
    return ref


class _Group:
    """A Borůvka tree: the union of its subtrees' basic sketch references."""

    __slots__ = ("rows", "vrows", "tab", "bip", "full2", "full4")

    def __init__(self):
        self.rows, self.vrows, self.tab, self.bip = [], [], [], []
        self.full2 = self.full4 = None

    def absorb(self, other: "_Group") -> None:
        self.rows += other.rows
        self.vrows += other.vrows
        self.tab += other.tab
        self.bip += other.bip
        if self.full2 is not None:
            self.full2 = self.full2 ^ other.full2
            self.full4 = self.full4 ^ other.full4

    def size(self) -> int:
        return 2 * (len(self.rows) + len(self.vrows)) + len(self.tab) + len(self.bip)


def _tab_idx(o, tab) -> np.ndarray:
    parts = [(o.Ch if s == "C" else o.Vh).idx[a:b] for s, a, b in tab]
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)


def _col2(o, grp: _Group, j: int) -> np.ndarray:
    out = np.zeros((o.sampler.rows, 2), dtype=U64)
    for store, refs in ((o.Cl, grp.rows), (o.V, grp.vrows)):
        if refs:
            idx = np.asarray(refs, dtype=np.int64).ravel()
            out ^= np.bitwise_xor.reduce(store.prefix[idx, :, j], axis=0)
    return out


def _col4(o, grp: _Group, j: int, dcache: dict) -> np.ndarray:
    L = o.sampler.levels
    idx = _tab_idx(o, grp.tab)
    t = o.table
    cube = column_cube(t.names[idx], t.la[idx, j], t.lb[idx, j], t.lc[idx, j], L)
    for gid, k0, k1 in grp.bip:
        cube ^= o.bip[gid].column(j, k0, k1, dcache[gid])
    return cube


def _full(o, grp: _Group, dcache: dict) -> tuple[np.ndarray, np.ndarray]:
    smp = o.sampler
    f2 = np.zeros((smp.rows, smp.cols, 2), dtype=U64)
    for store, refs in ((o.Cl, grp.rows), (o.V, grp.vrows)):
        if refs:
            idx = np.asarray(refs, dtype=np.int64).ravel()
            f2 ^= np.bitwise_xor.reduce(store.prefix[idx], axis=0)
    idx = _tab_idx(o, grp.tab)
    t = o.table
    f4 = cube_from_names(t.names[idx], t.la[idx], t.lb[idx], t.lc[idx], smp.levels)
    for gid, k0, k1 in grp.bip:
        f4 ^= o.bip[gid].full(k0, k1, dcache[gid])
    return f2, f4


def update(o: MCVertexOracle, D, eager: bool | None = None) -> MCSession:
    """Delete D: split affected trees, build interval sketches, run Borůvka, then the owner-tally step."""
    eager = o.eager if eager is None else eager
    h = o.h
    D = check_failures(o.g, D, None)
    aff, trees = affected_of(h, D)
    isets = split_affected(h, D, trees)
    keys = [(t, lab) for t, s in isets.items() for lab in dict.fromkeys(s.labels)]
    index = {k: i for i, k in enumerate(keys)}
    uf = UnionFind(len(index))
    zone = sorted(c for t in trees for c in o.hosted.get(t, ()))
    aff_sorted = sorted(aff)
    Dl = sorted(D)
    dcache = {gid: o.bip[gid].failure_parts(Dl) for gid in aff_sorted if gid in o.bip}
    groups = [_Group() for _ in keys]
    refs = {}
    n_refs = 0
    for t, iset in isets.items():
        for k in range(len(iset)):
            ref = interval_refs(o, Dl, aff_sorted, zone, t, iset.lefts[k], iset.rights[k])
            refs[(t, k)] = ref
            grp = groups[index[(t, iset.labels[k])]]
            grp.rows += ref.rows
            grp.vrows += ref.vrows
            grp.tab += ref.tab
            grp.bip += ref.bip
            n_refs += ref.count()
    if eager:
        for grp in groups:
            grp.full2, grp.full4 = _full(o, grp, dcache)
    session = MCSession(o, D, aff, trees, isets, index, uf)
    session.refs = refs
    stats = {"d": len(D), "affected_components": len(aff), "affected_trees": len(trees),
             "intervals": len(refs), "subtrees": len(index), "basic_sketches": n_refs,
             "probes": 0, "rejected": 0, "recovered": 0, "step4_merges": 0}
    session.stats = stats
    validate = _validator(o, session)
    live = {i: groups[i] for i in range(len(groups))}
    rounds = 0
    status = "ok"
    counter = [0]
    for j in range(o.sampler.cols):
        active = []
        for root, grp in live.items():
            if eager:
                c2, c4 = grp.full2[:, j], grp.full4[:, :, :, j]
            else:
                c2, c4 = _col2(o, grp, j), _col4(o, grp, j, dcache)
            if c2.any() or c4.any():
                active.append((root, grp, c2, c4))
        if not active:
            break
        rounds += 1
        picks = []
        for root, grp, c2, c4 in active:
            before = counter[0]
            hit = search_column(c2, lambda a, b, r=root: validate(a, b, r), counter)
            if hit is None:
                hit = search_cube(c4, lambda a, b, r=root: validate(a, b, r), counter)
            stats["probes"] += (counter[0] - before) * grp.size()
            if hit is None:
                stats["rejected"] += 1
            else:
                picks.append(hit)
        for a, b in picks:
            d = decode_name(a, b)
            x, y = session_subtree(session, d[1]), session_subtree(session, d[2])
            rx, ry = uf.find(x), uf.find(y)
            if rx != ry:
                uf.union(rx, ry)
                keep, gone = (rx, ry) if uf.find(rx) == rx else (ry, rx)
                live[keep].absorb(live.pop(gone))
                stats["recovered"] += 1
    else:
        status = "detected-failure" if _any_live(o, live, eager, dcache) else "ok"
    stats["step4_merges"] = _owner_tally(o, session)
    session.status = status
    session.rounds = rounds
    stats["rounds"] = rounds
    stats["status"] = status
    return session


def _any_live(o, live, eager, dcache) -> bool:
    j = o.sampler.cols - 1
    for grp in live.values():
        if eager:
            if grp.full2.any() or grp.full4.any():
                return True
        elif _col2(o, grp, j).any() or _col4(o, grp, j, dcache).any():
            return True
    return False


def session_subtree(s: FailureSession, v: int):
    """Subtree index holding v's terminal copy, or None when v is outside every affected tree."""
    h = s.oracle.h
    t, pos = h.principal(v)
    iset = s.isets.get(t)
    if iset is None:
        return None
    try:
        k = iset.interval_at(pos)
    except ValueError:
        return None
    return s.index[(t, iset.labels[k])]


def _validator(o: MCVertexOracle, s: MCSession):
    g, h, D, aff = o.g, o.h, s.D, s.affected

    def ok(a: int, b: int, root: int) -> bool:
        d = decode_name(a, b)
        if d is None:
            return False
        u, v = d[1], d[2]
        if not (u < g.n and v < g.n) or u in D or v in D:
            return False
        if d[0] == "original":
            if not g.has_edge(u, v):
                return False
        else:
            gid = d[3]
            bs = o.bip.get(gid)
            if bs is None or gid in aff or u not in bs.Aset or v not in bs.Bset:
                return False
        x, y = session_subtree(s, u), session_subtree(s, v)
        if x is None or y is None:
            return False
        return (s.uf.find(x) == root) != (s.uf.find(y) == root)

    return ok


def _owner_tally(o: MCVertexOracle, s: MCSession) -> int:
    """Merge subtrees touching A(gamma) for unaffected owners with at least |A(gamma)| pairs inside D."""
    Dl = sorted(s.D)
    tally: Counter = Counter()
    for x in range(len(Dl)):
        for y in range(x + 1, len(Dl)):
            gid = o.bsets.owner.get((Dl[x], Dl[y]))
            if gid is not None:
                tally[gid] += 1
    merges = 0
    for gid, cnt in sorted(tally.items()):
        A = o.h.adjacency[gid].items
        if gid in s.affected or cnt < len(A):
            continue
        subs = [session_subtree(s, v) for v in A if v not in s.D]
        subs = [x for x in subs if x is not None]
        for x in subs[1:]:
            if s.uf.union(subs[0], x):
                merges += 1
    return merges


def query(s: MCSession, u: int, v: int) -> bool:
    return s.query(u, v)


def expand_interval(o: MCVertexOracle, s: MCSession, key) -> Counter:
    """Symbolic expansion of one interval's sketch references into a parity multiset of names."""
    ref = s.refs[key]
    g, h = o.g, o.h
    out: Counter = Counter()
    inv = {r: v for v, r in enumerate(o.rank)}
    for store, refs, kind in ((o.Cl, ref.rows, "C"), (o.V, ref.vrows, "V")):
        for lo, hi in refs:
            k = bisect_right(store.off, lo) - 1
            a, b = lo - store.off[k], hi - store.off[k]
            for r in store.keys[k][a:b]:
                w = inv[r]
                if kind == "V":
                    out[("o",) + tuple(sorted((k, w)))] += 1
                else:
                    for x in g.adj[w]:
                        if h.home(x) == k and h.plevel[x] == h.components[k].level:
                            out[("o",) + tuple(sorted((x, w)))] += 1
    idx = _tab_idx(o, ref.tab)
    for i in idx:
        out[("a", int(o.table.first[i]), int(o.table.second[i]), int(o.table.prov[i]))] += 1
    for gid, k0, k1 in ref.bip:
        for u, v, gg in o.bip[gid].materialize(k0, k1, s.D):
            out[("a", u, v, gg)] += 1
    return Counter({k: 1 for k, c in out.items() if c % 2})
