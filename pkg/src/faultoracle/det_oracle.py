"""Deterministic connectivity oracle for up to dstar vertex failures."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .graph_core import Graph, UnionFind
from .hierarchy import Hierarchy, build_H, build_hierarchy
from .range_store import IntervalSet, build_et, enumerate_range, split_intervals


class CapacityError(ValueError):
    pass


class DomainError(ValueError):
    pass


class DetOracle:
    def __init__(self, g: Graph, dstar: int, hierarchy: Hierarchy | None = None):
        if dstar < 1:
            raise ValueError("dstar must be >= 1")
        self.g = g
        self.dstar = dstar
        self.h = hierarchy if hierarchy is not None else build_hierarchy(g)
        self.H = build_H(self.h, dstar)
        sizes = {t.id: len(t.order) for t in self.h.trees}
        self.et = build_et(self.H.edges, sizes)
        self.meta = {
            "p": self.h.p,
            "bad_sizes": [len(b) for _, b in self.h.levels],
            "trees": len(self.h.trees),
            "components": len(self.h.components),
            "h_edges": len(self.H.edges),
            "h_original": self.H.n_original,
            "h_lambda": self.H.n_lambda,
            "h_bound": self.H.bound(self.h, dstar),
            "pairs": len(self.et.directory),
        }

    def delete(self, D) -> "FailureSession":
        return delete(self, D)


def check_failures(g: Graph, D, cap: int | None) -> frozenset:
    D = frozenset(D)
    for v in D:
        if not (isinstance(v, int) and 0 <= v < g.n):
            raise DomainError(f"{v!r} is not a vertex")
    if cap is not None and len(D) > cap:
        raise CapacityError(f"|D|={len(D)} exceeds capacity {cap}")
    return D


def affected_of(h: Hierarchy, D) -> tuple[set, set]:
    aff = set()
    for v in D:
        aff.update(h.chains[h.home(v)])
    trees = {h.components[c].tau for c in aff}
    return aff, trees


def split_affected(h: Hierarchy, D, trees) -> dict:
    isets = {}
    for t in sorted(trees):
        order = h.trees[t].order
        isets[t] = split_intervals(order, [v for v in D if v in order.position], (), tree=t)
    return isets


@dataclass
class FailureSession:
    oracle: object
    D: frozenset
    affected: set
    trees: set
    isets: dict
    index: dict
    uf: UnionFind
    stats: dict = field(default_factory=dict)

    def label(self, v: int):
        """Reconnection-graph root of the subtree holding v's terminal copy."""
        h = self.oracle.h
        t, pos = h.principal(v)
        iset = self.isets.get(t)
        if iset is None:
            raise AssertionError(f"vertex {v} lies in an unaffected tree")
        return self.uf.find(self.index[(t, iset.labels[iset.interval_at(pos)])])

    def query(self, u: int, v: int) -> bool:
        return query(self, u, v)

    def subtree_count(self) -> int:
        return len(self.index)


def delete(o: DetOracle, D) -> FailureSession:
    h = o.h
    D = check_failures(o.g, D, o.dstar)
    aff, trees = affected_of(h, D)
    isets = split_affected(h, D, trees)
    keys = [(t, lab) for t, s in isets.items() for lab in dict.fromkeys(s.labels)]
    index = {k: i for i, k in enumerate(keys)}
    uf = UnionFind(len(index))
    ivs = [(t, k) for t, s in isets.items() for k in range(len(s))]
    suspect = {c + 1 for c in aff}
    reject = lambda pl: pl[0] in suspect
    directory = o.et.directory
    queries = rejected = r_edges = 0
    for a in range(len(ivs)):
        ta, ka = ivs[a]
        sa = isets[ta]
        la, ra, lab_a = sa.lefts[ka], sa.rights[ka], sa.labels[ka]
        ia = index[(ta, lab_a)]
        for b in range(a + 1, len(ivs)):
            tb, kb = ivs[b]
            sb = isets[tb]
            if ta == tb and lab_a == sb.labels[kb]:
                continue
            key = (ta, tb)
            if key not in directory:
                continue
            queries += 1
            hit, rej = enumerate_range(o.et, key, (la, ra, sb.lefts[kb], sb.rights[kb]), reject)
            rejected += rej
            if hit is not None:
                r_edges += 1
                uf.union(ia, index[(tb, sb.labels[kb])])
    stats = {
        "d": len(D),
        "affected_components": len(aff),
        "affected_trees": len(trees),
        "intervals": len(ivs),
        "subtrees": len(index),
        "range_queries": queries,
        "rejected": rejected,
        "r_edges": r_edges,
    }
    return FailureSession(o, D, aff, trees, isets, index, uf, stats)


def _hat(h: Hierarchy, aff: set, gamma: int, stats: dict) -> int | None:
    """Most ancestral unaffected ancestor of gamma, None if gamma itself is affected."""
    if gamma in aff:
        return None
    chain = h.chains[gamma]
    lo, hi = 0, len(chain)
    visits = 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        visits += 1
        if chain[mid] in aff:
            hi = mid
        else:
            lo = mid
    stats["step1_visits"] = max(stats.get("step1_visits", 0), visits)
    return chain[lo]


def resolve(h: Hierarchy, D, aff: set, u: int, v: int, stats: dict):
    """Shared query logic: True, False, or the pair of stand-in vertices to compare by label."""
    if u in D or v in D:
        raise DomainError("query vertex is failed")
    if u == v:
        return True
    hu = _hat(h, aff, h.home(u), stats)
    hv = _hat(h, aff, h.home(v), stats)
    if hu is not None and hu == hv:
        return True
    reps = []
    for w, hw in ((u, hu), (v, hv)):
        if hw is None:
            reps.append(w)
            continue
        rep = None
        for x in h.adjacency[hw].items:
            if x not in D:
                rep = x
                break
        if rep is None:
            return False
        reps.append(rep)
    return tuple(reps)


def query(s: FailureSession, u: int, v: int) -> bool:
    res = resolve(s.oracle.h, s.D, s.affected, u, v, s.stats)
    if isinstance(res, bool):
        return res
    return s.label(res[0]) == s.label(res[1])


def _tree_edges_at(order, positions) -> int:
    cut = set()
    kids = {}
    for p, q in enumerate(order.parent_pos):
        if q >= 0:
            kids.setdefault(q, []).append(p)
    for p in positions:
        if order.parent_pos[p] >= 0:
            cut.add(p)
        cut.update(kids.get(p, ()))
    return len(cut)


def audit_session(s: FailureSession) -> dict:
    """Check the structural bounds of one session; returns named results with a pass flag each."""
    o = s.oracle
    h = o.h
    d = len(s.D)
    p = h.p
    out = {}
    out["affected_components"] = (len(s.affected), d * (p + 1), len(s.affected) <= d * (p + 1))
    out["affected_subtrees"] = (len(s.index), 4 * d * (p + 1), len(s.index) <= 4 * d * (p + 1))
    ok = True
    worst = 0
    for t, iset in s.isets.items():
        f = _tree_edges_at(h.trees[t].order, iset.removed)
        ok &= len(iset) <= 2 * f + 1
        worst = max(worst, len(iset) - (2 * f + 1))
    out["intervals_per_tree"] = (worst, 0, ok)
    cap = (o.dstar + 1) * (o.dstar + 2) // 2
    worst_split = 0
    for c in s.affected:
        items = h.adjacency[c].items
        L = len(items)
        if L < 2:
            continue
        for k in range(1, L):
            crossing = sum(1 for a in range(max(0, k - o.dstar - 1), k) for b in range(k, min(L, a + o.dstar + 2)))
            worst_split = max(worst_split, crossing)
    out["lambda_split"] = (worst_split, cap, worst_split <= cap)
    visits_cap = math.ceil(math.log2(p + 1)) + 1 if p >= 0 else 1
    v1 = s.stats.get("step1_visits", 0)
    out["step1_visits"] = (v1, visits_cap, v1 <= visits_cap)
    return out
