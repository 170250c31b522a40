"""Low-degree hierarchy: level forests, nested components, adjacency lists and the multigraph H."""

from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass, field

from .fr_decomp import decomp
from .graph_core import EulerOrder, Graph, euler_order_from_adjacency


@dataclass
class LevelTree:
    id: int
    level: int
    order: EulerOrder

    @property
    def vertices(self) -> list:
        return self.order.order


@dataclass
class Component:
    id: int
    level: int
    vertices: frozenset
    terminals: list
    parent: int | None = None
    tau: int = -1


@dataclass
class Hierarchy:
    """Levels ``(T_i, B_i)`` plus everything derived from them.

    ``levels[i] = (tree_edges, bad)``; level 0 has terminal set V and level i
    has terminal set ``B_{i-1}``. The principal copy of v sits at level
    ``plevel[v]`` = 1 + the last level whose bad set holds v (0 if none).
    """

    g: Graph
    levels: list
    s: int = 4
    trees: list = field(default_factory=list)
    tree_at: list = field(default_factory=list)
    plevel: list = field(default_factory=list)
    components: list = field(default_factory=list)
    comp_at: list = field(default_factory=list)
    chains: list = field(default_factory=list)
    adjacency: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def p(self) -> int:
        return len(self.levels) - 1

    def principal(self, v: int) -> tuple[int, int]:
        """(tree id, Euler position) of v's terminal copy."""
        t = self.tree_at[self.plevel[v]][v]
        return t, self.trees[t].order.position[v]

    def home(self, v: int) -> int:
        """Component holding v's terminal copy."""
        return self.comp_at[self.plevel[v]][v]


def build_levels(g: Graph, s: int = 4) -> list:
    levels = []
    U = set(range(g.n))
    while True:
        res = decomp(g, U, s)
        levels.append((sorted(res.forest.edges), sorted(res.bad)))
        if not res.bad:
            return levels
        if len(res.bad) >= len(U):
            raise AssertionError("bad set failed to shrink")
        U = set(res.bad)


def build_hierarchy(g: Graph, levels: list | None = None, s: int = 4) -> Hierarchy:
    if levels is None:
        levels = build_levels(g, s)
    h = Hierarchy(g, [(list(t), list(b)) for t, b in levels], s)
    if g.n >= 8 and h.p >= math.log2(g.n) - 1:
        msg = f"hierarchy depth p={h.p} exceeds log2(n)-1 for n={g.n}"
        h.warnings.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    # bad sets need not be nested: a Steiner vertex of one level may turn bad
    # later, so the terminal copy sits just above the last bad set holding v
    plevel = [0] * g.n
    for i, (_, bad) in enumerate(h.levels):
        for v in bad:
            plevel[v] = i + 1
    h.plevel = plevel
    _build_trees(h)
    build_components(h)
    for comp in h.components:
        h.adjacency.append(adjacency_list(h, comp.id))
    return h


def _build_trees(h: Hierarchy) -> None:
    g = h.g
    prev_bad = set(range(g.n))
    for i, (edges, bad) in enumerate(h.levels):
        badset = set(bad)
        terms = prev_bad - badset
        tadj: dict = {}
        for e in edges:
            a, b = g.edges[e]
            if a in badset or b in badset:
                continue
            tadj.setdefault(a, []).append(b)
            tadj.setdefault(b, []).append(a)
        where: dict = {}
        for r in sorted(set(tadj) | terms):
            if r in where:
                continue
            comp = [r]
            where[r] = -1
            queue = deque([r])
            while queue:
                x = queue.popleft()
                for y in tadj.get(x, ()):
                    if y not in where:
                        where[y] = -1
                        comp.append(y)
                        queue.append(y)
            if not any(v in terms for v in comp):
                continue
            tid = len(h.trees)
            order = euler_order_from_adjacency(tadj, r)
            h.trees.append(LevelTree(tid, i, order))
            for v in comp:
                where[v] = tid
        h.tree_at.append({v: t for v, t in where.items() if t >= 0})
        prev_bad = badset


def build_components(h: Hierarchy) -> list:
    """Components of G minus suffix unions of bad sets holding a level terminal, with parent links."""
    g = h.g
    p = h.p
    removed = [False] * g.n
    per_level = [None] * (p + 1)
    for i in range(p, -1, -1):
        for v in h.levels[i][1]:
            removed[v] = True
        label = [-1] * g.n
        comps = []
        for s in range(g.n):
            if removed[s] or label[s] >= 0:
                continue
            label[s] = len(comps)
            members = [s]
            queue = deque([s])
            while queue:
                x = queue.popleft()
                for y in g.adj[x]:
                    if not removed[y] and label[y] < 0:
                        label[y] = len(comps)
                        members.append(y)
                        queue.append(y)
            comps.append(members)
        per_level[i] = (label, comps)
    h.components = []
    h.comp_at = []
    for i in range(p + 1):
        label, comps = per_level[i]
        at = [-1] * g.n
        for members in comps:
            terms = sorted(v for v in members if h.plevel[v] == i)
            if not terms:
                continue
            cid = len(h.components)
            comp = Component(cid, i, frozenset(members), terms)
            hosts = {h.tree_at[i][t] for t in terms}
            if len(hosts) != 1:
                raise AssertionError(f"terminals of component {cid} span {len(hosts)} trees")
            comp.tau = hosts.pop()
            h.components.append(comp)
            for v in members:
                at[v] = cid
        h.comp_at.append(at)
    for comp in h.components:
        rep = next(iter(comp.vertices))
        for j in range(comp.level + 1, p + 1):
            c = h.comp_at[j][rep]
            if c >= 0:
                comp.parent = c
                break
    h.chains = []
    for comp in h.components:
        chain = [comp.id]
        while h.components[chain[-1]].parent is not None:
            chain.append(h.components[chain[-1]].parent)
        h.chains.append(chain)
    return h.components


@dataclass
class AdjList:
    """Terminal copies adjacent to a component, grouped by ancestor level, Euler-sorted."""

    gamma: int
    items: list
    segments: list  # (ancestor component, start, stop) in ascending level order


def adjacency_list(h: Hierarchy, gamma: int) -> AdjList:
    comp = h.components[gamma]
    g = h.g
    outside = set()
    for v in comp.vertices:
        for w in g.adj[v]:
            if w not in comp.vertices:
                outside.add(w)
    by_level: dict = {}
    for w in outside:
        by_level.setdefault(h.plevel[w], []).append(w)
    chain = h.chains[gamma]
    anc_at = {h.components[c].level: c for c in chain[1:]}
    items = []
    segments = []
    for lev in sorted(by_level):
        anc = anc_at.get(lev)
        ws = by_level[lev]
        for w in ws:
            if h.home(w) != anc:
                raise AssertionError(f"neighbour {w} of component {gamma} is not in an ancestor")
        ws.sort(key=lambda w: h.principal(w)[1])
        segments.append((anc, len(items), len(items) + len(ws)))
        items.extend(ws)
    return AdjList(gamma, items, segments)


def lambda_edges(L, dstar: int) -> list:
    """Pairs of list positions at distance at most dstar+1."""
    if dstar < 1:
        raise ValueError("dstar must be >= 1")
    out = []
    for a in range(len(L)):
        for b in range(a + 1, min(len(L), a + dstar + 2)):
            out.append((L[a], L[b]))
    return out


@dataclass
class MultigraphH:
    """Edges between terminal copies: ((tree, pos), (tree, pos), (provenance, u, v)).

    Provenance 0 marks an original edge; a component id c is stored as c + 1.
    """

    edges: list
    n_original: int
    n_lambda: int

    def bound(self, h: Hierarchy, dstar: int) -> int:
        g = h.g
        return g.m + h.p * (dstar + 1) * g.m + (h.p + 1) * g.n


def build_H(h: Hierarchy, dstar: int) -> MultigraphH:
    edges = []
    for u, v in h.g.edges:
        edges.append((h.principal(u), h.principal(v), (0, u, v)))
    n_orig = len(edges)
    for adj in h.adjacency:
        for a, b in lambda_edges(adj.items, dstar):
            edges.append((h.principal(a), h.principal(b), (adj.gamma + 1, a, b)))
    return MultigraphH(edges, n_orig, len(edges) - n_orig)
