"""Low-degree Steiner forests by local improvement, and the recursive low-degree decomposition.

The improvement loop marks tree vertices good or bad. Tree vertices of degree
at least k-1 (k the maximum degree) start bad. A witness is a graph edge, or a
path through one component of non-tree vertices (a "hub"), that joins two good
tree vertices lying in different components of the good forest. All bad
vertices on the tree path between the endpoints become good. Marking a
degree-k vertex good means a swap lowers its degree. When marking converges,
the remaining bad vertices form the bad set.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable

from .graph_core import Graph


@dataclass(frozen=True)
class SteinerForest:
    terminals: frozenset
    edges: frozenset
    degree: dict

    def max_degree(self) -> int:
        return max(self.degree.values(), default=0)

    def vertices(self) -> set:
        return set(self.terminals) | {v for v, d in self.degree.items() if d > 0}


@dataclass(frozen=True)
class DecompResult:
    forest: SteinerForest
    bad: frozenset


class _Instance:
    """A subgraph with local vertex ids; edges keep their global edge index."""

    __slots__ = ("glob", "loc", "adj", "emap", "N")

    def __init__(self, verts: list, edges: Iterable[tuple[int, int, int]]):
        self.glob = verts
        self.loc = {v: i for i, v in enumerate(verts)}
        self.N = len(verts)
        self.adj = [[] for _ in verts]
        self.emap = {}
        for a, b, e in edges:
            la, lb = self.loc[a], self.loc[b]
            self.emap[e] = (la, lb)
            self.adj[la].append((e, lb))
            self.adj[lb].append((e, la))
        for lst in self.adj:
            lst.sort()

    @classmethod
    def of_graph(cls, g: Graph) -> "_Instance":
        return cls(list(range(g.n)), ((u, v, i) for i, (u, v) in enumerate(g.edges)))


def _initial_forest(inst: _Instance, term: list) -> list:
    tadj = [dict() for _ in range(inst.N)]
    seen = [False] * inst.N
    for r in range(inst.N):
        if not term[r] or seen[r]:
            continue
        seen[r] = True
        queue = deque([r])
        while queue:
            x = queue.popleft()
            for e, y in inst.adj[x]:
                if not seen[y]:
                    seen[y] = True
                    tadj[x][y] = e
                    tadj[y][x] = e
                    queue.append(y)
    _prune(tadj, term, range(inst.N))
    return tadj


def _prune(tadj: list, term: list, candidates) -> None:
    stack = [v for v in candidates if not term[v] and len(tadj[v]) == 1]
    while stack:
        v = stack.pop()
        if term[v] or len(tadj[v]) != 1:
            continue
        (w, _), = tadj[v].items()
        del tadj[v][w]
        del tadj[w][v]
        if not term[w] and len(tadj[w]) == 1:
            stack.append(w)


def _potential(tadj: list) -> tuple[int, int]:
    degs = [len(a) for a in tadj]
    k = max(degs, default=0)
    return k, degs.count(k)


def _tree_path(tadj: list, x: int, y: int) -> list:
    prev = {x: None}
    queue = deque([x])
    while queue:
        a = queue.popleft()
        if a == y:
            break
        for b in tadj[a]:
            if b not in prev:
                prev[b] = a
                queue.append(b)
    if y not in prev:
        raise AssertionError("witness endpoints are not connected in the current forest")
    path = [y]
    while path[-1] != x:
        path.append(prev[path[-1]])
    path.reverse()
    return path


class _Phase:
    """One round of good/bad marking over the current forest."""

    def __init__(self, inst: _Instance, term: list, tadj: list):
        self.inst, self.term, self.tadj = inst, term, tadj
        N = inst.N
        deg = [len(a) for a in tadj]
        self.deg = deg
        self.k = k = max(deg, default=0)
        in_tree = [term[v] or deg[v] > 0 for v in range(N)]
        self.in_tree = in_tree
        parent = [-1] * N
        depth = [0] * N
        seen = [False] * N
        for r in range(N):
            if not in_tree[r] or seen[r]:
                continue
            seen[r] = True
            queue = deque([r])
            while queue:
                x = queue.popleft()
                for y in tadj[x]:
                    if not seen[y]:
                        seen[y] = True
                        parent[y] = x
                        depth[y] = depth[x] + 1
                        queue.append(y)
        self.parent, self.depth = parent, depth
        self.bad = [in_tree[v] and deg[v] >= k - 1 for v in range(N)]
        self.orig_bad = list(self.bad)
        self.uf = list(range(N))
        self.top = list(range(N))
        for v in range(N):
            p = parent[v]
            if in_tree[v] and not self.bad[v] and p >= 0 and not self.bad[p]:
                self._union(v, p)
        hub = [-1] * N
        nh = 0
        for s in range(N):
            if in_tree[s] or hub[s] >= 0:
                continue
            hub[s] = nh
            queue = deque([s])
            while queue:
                x = queue.popleft()
                for _, y in inst.adj[x]:
                    if not in_tree[y] and hub[y] < 0:
                        hub[y] = nh
                        queue.append(y)
            nh += 1
        self.hub = hub
        self.anchor: dict = {}
        self.witness: dict = {}

    def _find(self, x: int) -> int:
        uf = self.uf
        while uf[x] != x:
            uf[x] = uf[uf[x]]
            x = uf[x]
        return x

    def _union(self, a: int, b: int) -> None:
        ra, rb = self._find(a), self._find(b)
        if ra == rb:
            return
        ta, tb = self.top[ra], self.top[rb]
        self.uf[rb] = ra
        self.top[ra] = ta if self.depth[ta] <= self.depth[tb] else tb

    def _comp(self, v: int) -> int:
        return -v - 1 if self.bad[v] else self._find(v)

    def _top_of(self, v: int) -> int:
        return v if self.bad[v] else self.top[self._find(v)]

    def _mark(self, x: int, y: int, h) -> int | None:
        a, b = x, y
        path_bad = []
        depth, parent, bad = self.depth, self.parent, self.bad
        while self._comp(a) != self._comp(b):
            ta, tb = self._top_of(a), self._top_of(b)
            if depth[ta] >= depth[tb]:
                a = parent[ta]
                if a < 0:
                    raise AssertionError("climbed past a root")
                if bad[a]:
                    path_bad.append(a)
            else:
                b = parent[tb]
                if b < 0:
                    raise AssertionError("climbed past a root")
                if bad[b]:
                    path_bad.append(b)
        hit = None
        for z in dict.fromkeys(path_bad):
            bad[z] = False
            self.witness[z] = (x, y, h)
            for w in self.tadj[z]:
                if not bad[w]:
                    self._union(z, w)
            self.queue.append(z)
            if self.deg[z] == self.k and hit is None:
                hit = z
        return hit

    def run(self) -> int | None:
        """Return a degree-k vertex marked good, or None once marking converges."""
        inst, in_tree, bad, hub = self.inst, self.in_tree, self.bad, self.hub
        self.queue = deque(v for v in range(inst.N) if in_tree[v] and not bad[v])
        while self.queue:
            x = self.queue.popleft()
            for _, y in inst.adj[x]:
                if in_tree[y]:
                    if bad[y] or self._find(x) == self._find(y):
                        continue
                    hit = self._mark(x, y, None)
                else:
                    h = hub[y]
                    a = self.anchor.get(h)
                    if a is None:
                        self.anchor[h] = x
                        continue
                    if self._find(a) == self._find(x):
                        continue
                    hit = self._mark(a, x, h)
                if hit is not None:
                    return hit
        return None

    def _hub_path(self, x: int, y: int, h: int) -> list:
        inst, hub, tadj, term = self.inst, self.hub, self.tadj, self.term
        targets = {w for _, w in inst.adj[y]}
        prev = {}
        queue = deque()
        for _, w in inst.adj[x]:
            if hub[w] == h and not tadj[w] and not term[w] and w not in prev:
                prev[w] = x
                queue.append(w)
        while queue:
            a = queue.popleft()
            if a in targets:
                path = [y, a]
                while path[-1] != x:
                    path.append(prev[path[-1]])
                return path
            for _, w in inst.adj[a]:
                if hub[w] == h and w not in prev and not tadj[w] and not term[w]:
                    prev[w] = a
                    queue.append(w)
        raise AssertionError("hub no longer joins the witness endpoints")

    def apply(self, w: int) -> None:
        tadj, inst = self.tadj, self.inst
        done = set()

        def edge_id(a, b):
            for e, c in inst.adj[a]:
                if c == b:
                    return e
            raise KeyError((a, b))

        def improve(z):
            x, y, h = self.witness[z]
            for end in (x, y):
                if self.orig_bad[end] and end in self.witness and end not in done:
                    improve(end)
            path = _tree_path(tadj, x, y)
            i = path.index(z)
            nb = [path[i - 1], path[i + 1]]
            q = min(nb, key=lambda c: tadj[z][c])
            del tadj[z][q]
            del tadj[q][z]
            if h is None:
                seq = [x, y]
            else:
                seq = self._hub_path(x, y, h)
            for a, b in zip(seq, seq[1:]):
                e = edge_id(a, b)
                tadj[a][b] = e
                tadj[b][a] = e
            done.add(z)

        improve(w)
        _prune(tadj, self.term, range(inst.N))

    def bad_set(self) -> list:
        return [v for v in range(self.inst.N) if self.bad[v]]


def _fr_local(inst: _Instance, term: list, tadj: list | None = None, stats: dict | None = None):
    if tadj is None:
        tadj = _initial_forest(inst, term)
    steps = 0
    while True:
        ph = _Phase(inst, term, tadj)
        w = ph.run()
        if w is None:
            if stats is not None:
                stats["improvements"] = stats.get("improvements", 0) + steps
            return tadj, ph.bad_set()
        before = _potential(tadj)
        ph.apply(w)
        after = _potential(tadj)
        if not after < before:
            raise AssertionError(f"improvement did not lower the potential: {before} -> {after}")
        steps += 1


def _to_forest(inst: _Instance, term: list, tadj: list) -> SteinerForest:
    edges = set()
    degree = {}
    for a in range(inst.N):
        if tadj[a] or term[a]:
            degree[inst.glob[a]] = len(tadj[a])
        for e in tadj[a].values():
            edges.add(e)
    terms = frozenset(inst.glob[v] for v in range(inst.N) if term[v])
    return SteinerForest(terms, frozenset(edges), degree)


def _term_mask(g: Graph, U) -> list:
    term = [False] * g.n
    for u in U:
        if not 0 <= u < g.n:
            raise ValueError(f"terminal {u} out of range")
        term[u] = True
    return term


def fr_tree(g: Graph, U) -> tuple[SteinerForest, frozenset]:
    """Low-degree Steiner forest for U and its converged bad set."""
    U = set(U)
    if not U:
        raise ValueError("terminal set must be nonempty")
    inst = _Instance.of_graph(g)
    term = _term_mask(g, U)
    tadj, bad = _fr_local(inst, term)
    return _to_forest(inst, term, tadj), frozenset(bad)


def _tadj_from_edges(g: Graph, inst: _Instance, edges) -> list:
    tadj = [dict() for _ in range(inst.N)]
    for e in edges:
        a, b = g.edges[e]
        tadj[a][b] = e
        tadj[b][a] = e
    return tadj


def improvement_step(g: Graph, T: SteinerForest | Iterable[int], U) -> SteinerForest | None:
    """One marking round over forest T; the improved forest, or None if marking converges."""
    edges = T.edges if isinstance(T, SteinerForest) else T
    inst = _Instance.of_graph(g)
    term = _term_mask(g, U)
    tadj = _tadj_from_edges(g, inst, edges)
    ph = _Phase(inst, term, tadj)
    w = ph.run()
    if w is None:
        return None
    ph.apply(w)
    return _to_forest(inst, term, tadj)


def _components(inst: _Instance, alive) -> list:
    comp = [-1] * inst.N
    out = []
    for s in range(inst.N):
        if comp[s] >= 0 or not alive[s]:
            continue
        comp[s] = len(out)
        members = [s]
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for _, y in inst.adj[x]:
                if comp[y] < 0 and alive[y]:
                    comp[y] = len(out)
                    members.append(y)
                    queue.append(y)
        out.append(members)
    return out


def _decomp_local(inst: _Instance, term: list, s: int, T: set, B: set, depth: int = 0) -> None:
    """Accumulate global tree edges into T and global bad vertices into B."""
    alive = [True] * inst.N
    for members in _components(inst, alive):
        if sum(term[v] for v in members) <= 1:
            continue
        if len(members) < inst.N:
            members.sort()
            keep = set(members)
            sub = _Instance(
                [inst.glob[v] for v in members],
                ((inst.glob[a], inst.glob[b], e) for e, (a, b) in inst.emap.items() if a in keep),
            )
            sub_term = [term[v] for v in members]
            _decomp_component(sub, sub_term, s, T, B, depth)
        else:
            _decomp_component(inst, term, s, T, B, depth)


def _decomp_component(inst: _Instance, term: list, s: int, T: set, B: set, depth: int) -> None:
    tadj, bad = _fr_local(inst, term)
    k = max((len(a) for a in tadj), default=0)
    if k <= s:
        for a in range(inst.N):
            T.update(tadj[a].values())
        return
    bset = set(bad)
    B.update(inst.glob[b] for b in bset)
    N = inst.N
    kcomp = [-1] * N
    ks = []
    for r in range(N):
        if r in bset or kcomp[r] >= 0 or not tadj[r]:
            continue
        kcomp[r] = len(ks)
        members = [r]
        queue = deque([r])
        while queue:
            x = queue.popleft()
            for y in tadj[x]:
                if y not in bset and kcomp[y] < 0:
                    kcomp[y] = len(ks)
                    members.append(y)
                    queue.append(y)
        ks.append(members)
    for b in bset:
        for c, e in tadj[b].items():
            if c in bset and b < c:
                T.add(e)
    alive = [v not in bset for v in range(N)]
    reach = [-1] * N
    for idx, members in enumerate(ks):
        # vertices reachable from this piece in G - B'
        V = []
        queue = deque()
        for v in members:
            if reach[v] >= 0 and reach[v] != idx:
                raise AssertionError("pieces of T' - B' share a component of G - B'")
            if reach[v] < 0:
                reach[v] = idx
                V.append(v)
                queue.append(v)
        while queue:
            x = queue.popleft()
            for _, y in inst.adj[x]:
                if alive[y] and reach[y] < 0:
                    reach[y] = idx
                    V.append(y)
                    queue.append(y)
                elif alive[y] and reach[y] != idx:
                    raise AssertionError("pieces of T' - B' share a component of G - B'")
        leaf_edges = []
        for v in members:
            for c, e in tadj[v].items():
                if c in bset:
                    leaf_edges.append((c, v, e))
        Vset = set(V)
        verts = sorted(V + [c for c, _, _ in leaf_edges])
        edges = [(inst.glob[a], inst.glob[b], e) for e, (a, b) in inst.emap.items() if a in Vset and b in Vset]
        edges.extend((inst.glob[c], inst.glob[v], e) for c, v, e in leaf_edges)
        sub = _Instance([inst.glob[v] for v in verts], edges)
        leaves = {c for c, _, _ in leaf_edges}
        sub_term = [term[v] or v in leaves for v in verts]
        if sum(sub_term) <= 1:
            continue
        _decomp_local(sub, sub_term, s, T, B, depth + 1)


def decomp(g: Graph, U, s: int) -> DecompResult:
    """Bad set B and Steiner forest T with max degree of T - B at most s."""
    if s < 3:
        raise ValueError("s must be at least 3")
    U = set(U)
    term = _term_mask(g, U)
    T: set = set()
    B: set = set()
    if len(U) > 1:
        _decomp_local(_Instance.of_graph(g), term, s, T, B)
    degree = {u: 0 for u in U}
    for e in T:
        a, b = g.edges[e]
        degree[a] = degree.get(a, 0) + 1
        degree[b] = degree.get(b, 0) + 1
    return DecompResult(SteinerForest(frozenset(U), frozenset(T), degree), frozenset(B))
