"""Euler-ordered 2D point sets per tree pair, interval splitting and interval location."""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable

from .graph_core import EulerOrder, Graph, UnionFind, spanning_forest, euler_first_occurrence

SMALL = 24


class RangeTree2D:
    """Static merge-sort range tree over points (x, y) with payloads.

    ``first_accepted`` walks the canonical x-nodes left to right and each node's
    points by ascending y, so the visiting order is deterministic. Pairs with a
    handful of points are scanned linearly in (x, y) order instead.
    """

    def __init__(self, points: Iterable[tuple[int, int, object]]):
        pts = sorted(points, key=lambda p: (p[0], p[1]))
        self.xs = [p[0] for p in pts]
        self.ys = [p[1] for p in pts]
        self.payloads = [p[2] for p in pts]
        n = len(pts)
        self.size = 1
        while self.size < n:
            self.size *= 2
        self.node_ys: list = []
        self.node_ix: list = []
        if n > SMALL:
            node_ys = [[] for _ in range(2 * self.size)]
            node_ix = [[] for _ in range(2 * self.size)]
            for i in range(n):
                node_ys[self.size + i] = [self.ys[i]]
                node_ix[self.size + i] = [i]
            for v in range(self.size - 1, 0, -1):
                merged = sorted(zip(node_ys[2 * v] + node_ys[2 * v + 1], node_ix[2 * v] + node_ix[2 * v + 1]))
                node_ys[v] = [y for y, _ in merged]
                node_ix[v] = [i for _, i in merged]
            self.node_ys, self.node_ix = node_ys, node_ix

    def __len__(self) -> int:
        return len(self.xs)

    def first_accepted(self, x1: int, x2: int, y1: int, y2: int, reject: Callable | None = None):
        """Return (payload or None, number of rejected points visited)."""
        lo = bisect_left(self.xs, x1)
        hi = bisect_right(self.xs, x2)
        rejected = 0
        if lo >= hi:
            return None, 0
        if not self.node_ys:
            ys, pl = self.ys, self.payloads
            for i in range(lo, hi):
                if y1 <= ys[i] <= y2:
                    p = pl[i]
                    if reject is not None and reject(p):
                        rejected += 1
                    else:
                        return p, rejected
            return None, rejected
        left, right = [], []
        l, r = lo + self.size, hi + self.size
        while l < r:
            if l & 1:
                left.append(l)
                l += 1
            if r & 1:
                r -= 1
                right.append(r)
            l >>= 1
            r >>= 1
        left.extend(reversed(right))
        pl = self.payloads
        for node in left:
            ys = self.node_ys[node]
            ix = self.node_ix[node]
            k = bisect_left(ys, y1)
            while k < len(ys) and ys[k] <= y2:
                p = pl[ix[k]]
                if reject is not None and reject(p):
                    rejected += 1
                else:
                    return p, rejected
                k += 1
        return None, rejected

    def report(self, x1: int, x2: int, y1: int, y2: int) -> list:
        lo = bisect_left(self.xs, x1)
        hi = bisect_right(self.xs, x2)
        return [self.payloads[i] for i in range(lo, hi) if y1 <= self.ys[i] <= y2]


@dataclass
class ETStructure:
    """Points indexed by unordered tree pair; ``directory`` only holds nonempty pairs."""

    directory: dict
    tree_sizes: dict
    n_points: int = 0

    def pair(self, ta: int, tb: int):
        return self.directory.get((ta, tb) if ta <= tb else (tb, ta))


def build_et(edges: Iterable[tuple[tuple[int, int], tuple[int, int], object]], tree_sizes: dict) -> ETStructure:
    """Index multigraph edges given as ((tree, pos), (tree, pos), payload).

    Points of a pair (ta, tb) with ta < tb are stored as (pos in ta, pos in tb);
    inside one tree they are normalized to x <= y.
    """
    buckets: dict = {}
    count = 0
    for (ta, xa), (tb, xb), payload in edges:
        for t, x in ((ta, xa), (tb, xb)):
            if t not in tree_sizes or not (0 <= x < tree_sizes[t]):
                raise ValueError(f"endpoint ({t}, {x}) has no Euler position")
        if ta > tb or (ta == tb and xa > xb):
            ta, xa, tb, xb = tb, xb, ta, xa
        buckets.setdefault((ta, tb), []).append((xa, xb, payload))
        count += 1
    directory = {key: RangeTree2D(pts) for key, pts in buckets.items()}
    return ETStructure(directory, dict(tree_sizes), count)


def enumerate_range(s: ETStructure, pair: tuple[int, int], rect: tuple[int, int, int, int], reject=None):
    """First accepted payload inside rect ``(x1, x2, y1, y2)`` of the pair, plus rejected visits.

    The rect is expressed in the pair's stored orientation (first tree is x).
    Unknown pairs are empty.
    """
    tree = s.directory.get(pair)
    if tree is None:
        return None, 0
    return tree.first_accepted(*rect, reject=reject)


@dataclass
class IntervalSet:
    """Surviving Euler intervals of one tree; label = Euler position of the subtree root."""

    tree: Hashable
    lefts: list
    rights: list
    labels: list
    removed: set = field(default_factory=set)

    def __len__(self) -> int:
        return len(self.lefts)

    def subtrees(self) -> set:
        return set(self.labels)

    def interval_at(self, pos: int) -> int:
        k = bisect_right(self.lefts, pos) - 1
        if k < 0 or pos > self.rights[k]:
            raise ValueError(f"position {pos} is removed")
        return k


def _children(order: EulerOrder) -> list:
    kids = getattr(order, "_kids", None)
    if kids is None:
        kids = [[] for _ in order.order]
        for p, q in enumerate(order.parent_pos):
            if q >= 0:
                kids[q].append(p)
        order._kids = kids
    return kids


def split_intervals(order: EulerOrder, removed_vertices=(), removed_tree_edges=(), tree: Hashable = 0) -> IntervalSet:
    """Split the Euler order after deleting tree edges and vertices.

    A deleted vertex cuts all its tree edges and its own position is excised.
    """
    pos = order.position
    parent_pos = order.parent_pos
    cut_roots = set()
    excised = set()
    for v in removed_vertices:
        p = pos[v]
        excised.add(p)
        if parent_pos[p] >= 0:
            cut_roots.add(p)
        cut_roots.update(_children(order)[p])
    for a, b in removed_tree_edges:
        pa, pb = pos[a], pos[b]
        if parent_pos[pb] == pa:
            cut_roots.add(pb)
        elif parent_pos[pa] == pb:
            cut_roots.add(pa)
        else:
            raise ValueError(f"({a}, {b}) is not a tree edge")
    n = len(order.order)
    breaks = {0, n}
    for c in cut_roots:
        breaks.add(c)
        breaks.add(order.end[c] + 1)
    for q in excised:
        breaks.add(q)
        breaks.add(q + 1)
    pts = sorted(breaks)
    starts = sorted(cut_roots)
    si = 0
    stack: list = []
    lefts, rights, labels = [], [], []
    end = order.end
    for a, b in zip(pts, pts[1:]):
        while stack and end[stack[-1]] < a:
            stack.pop()
        while si < len(starts) and starts[si] == a:
            stack.append(starts[si])
            si += 1
        if a in excised:
            continue
        lab = stack[-1] if stack else 0
        if lefts and labels[-1] == lab and rights[-1] == a - 1:
            rights[-1] = b - 1
        else:
            lefts.append(a)
            rights.append(b - 1)
            labels.append(lab)
    return IntervalSet(tree, lefts, rights, labels, excised)


def locate(iset: IntervalSet, v: int, order: EulerOrder):
    """Subtree label of vertex v, via binary search over interval left endpoints."""
    return iset.labels[iset.interval_at(order.position[v])]


class ForestOracle:
    """Spanning-forest connectivity under edge and vertex failures.

    Every graph edge is a point between the Euler positions of its endpoints;
    after a deletion each pair of surviving intervals is probed once, and
    discovered edges are unioned.
    """

    def __init__(self, g: Graph):
        self.g = g
        self.forest = spanning_forest(g)
        self.orders = {}
        self.tree_of = [0] * g.n
        for r in self.forest.roots:
            eo = euler_first_occurrence(self.forest, r)
            self.orders[r] = eo
            for v in eo.order:
                self.tree_of[v] = r
        pts = []
        for i, (u, v) in enumerate(g.edges):
            tu, tv = self.tree_of[u], self.tree_of[v]
            pts.append(((tu, self.orders[tu].position[u]), (tv, self.orders[tv].position[v]), i))
        self.et = build_et(pts, {r: len(eo) for r, eo in self.orders.items()})
        self.stats = {}

    def delete(self, failed_vertices=(), failed_edges=()):
        g = self.g
        fv = set(failed_vertices)
        fe = {g.edge_index(a, b) for a, b in failed_edges}
        tree_cut: dict = {}
        for e in fe:
            if e in self.forest.edgeset:
                u, v = g.edges[e]
                tree_cut.setdefault(self.tree_of[u], []).append((u, v))
        vcut: dict = {}
        for v in fv:
            vcut.setdefault(self.tree_of[v], []).append(v)
        self.isets = {}
        for r, eo in self.orders.items():
            if r in tree_cut or r in vcut:
                self.isets[r] = split_intervals(eo, vcut.get(r, ()), tree_cut.get(r, ()), tree=r)
        ivs = [(r, k) for r, s in self.isets.items() for k in range(len(s))]
        keys = {(r, lab) for r, s in self.isets.items() for lab in s.labels}
        self.index = {key: i for i, key in enumerate(sorted(keys))}
        uf = UnionFind(len(self.index))
        queries = rejected = 0
        reject = fe.__contains__
        for a in range(len(ivs)):
            ra, ka = ivs[a]
            sa = self.isets[ra]
            for b in range(a + 1, len(ivs)):
                rb, kb = ivs[b]
                sb = self.isets[rb]
                if ra == rb and sa.labels[ka] == sb.labels[kb]:
                    continue
                if ra <= rb:
                    key, rect = (ra, rb), (sa.lefts[ka], sa.rights[ka], sb.lefts[kb], sb.rights[kb])
                else:
                    key, rect = (rb, ra), (sb.lefts[kb], sb.rights[kb], sa.lefts[ka], sa.rights[ka])
                if key not in self.et.directory:
                    continue
                queries += 1
                hit, rej = enumerate_range(self.et, key, rect, reject)
                rejected += rej
                if hit is not None:
                    uf.union(self.index[(ra, sa.labels[ka])], self.index[(rb, sb.labels[kb])])
        self.uf = uf
        self.failed = fv
        self.stats = {"range_queries": queries, "rejected": rejected, "intervals": len(ivs)}
        return self

    def _label(self, v):
        r = self.tree_of[v]
        s = self.isets.get(r)
        if s is None:
            return ("whole", r)
        return ("part", self.uf.find(self.index[(r, locate(s, v, self.orders[r]))]))

    def connected(self, u: int, v: int) -> bool:
        if u in self.failed or v in self.failed:
            raise ValueError("query vertex is failed")
        return u == v or self._label(u) == self._label(v)
