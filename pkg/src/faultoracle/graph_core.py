"""Static graphs, generators, spanning forests, Euler orders and the BFS reference oracle."""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import networkx as nx


class GraphParseError(ValueError):
    pass


class UnionFind:
    """Array union-find with path halving and union by size.

    >>> uf = UnionFind(4)
    >>> uf.union(0, 1), uf.union(1, 0)
    (True, False)
    >>> uf.find(1) == uf.find(0), uf.find(2) == uf.find(3)
    (True, False)
    """

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def add(self) -> int:
        self.parent.append(len(self.parent))
        self.size.append(1)
        return len(self.parent) - 1

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


class Graph:
    """Immutable simple undirected graph.

    ``edges[i]`` is the canonical pair ``(u, v)`` with ``u < v`` and ``ids[i]`` its
    stable id. Internal edge indices follow ascending id order.
    """

    __slots__ = ("n", "edges", "ids", "adj", "adj_edges", "_index")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]], ids: Sequence[int] | None = None):
        canon = []
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            canon.append((u, v) if u < v else (v, u))
        if ids is None:
            ids = range(len(canon))
        ids = list(ids)
        if len(ids) != len(canon):
            raise ValueError("ids and edges differ in length")
        order = sorted(range(len(canon)), key=lambda i: ids[i])
        self.n = n
        self.edges = tuple(canon[i] for i in order)
        self.ids = tuple(ids[i] for i in order)
        self._index = {}
        for i, e in enumerate(self.edges):
            if e in self._index:
                raise ValueError(f"duplicate edge {e}")
            self._index[e] = i
        nbrs: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for i, (u, v) in enumerate(self.edges):
            nbrs[u].append((v, i))
            nbrs[v].append((u, i))
        for lst in nbrs:
            lst.sort()
        self.adj = tuple(tuple(w for w, _ in lst) for lst in nbrs)
        self.adj_edges = tuple(tuple(i for _, i in lst) for lst in nbrs)

    @property
    def m(self) -> int:
        return len(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self._index

    def edge_index(self, u: int, v: int) -> int:
        return self._index[(u, v) if u < v else (v, u)]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def max_degree(self) -> int:
        return max((len(a) for a in self.adj), default=0)

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def load_graph(text: str) -> Graph:
    lines = [ln for ln in text.splitlines()]
    rows = [(k + 1, ln.split()) for k, ln in enumerate(lines) if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise GraphParseError("line 1: missing header 'n m'")
    lineno, head = rows[0]
    try:
        n, m = (int(x) for x in head)
    except ValueError:
        raise GraphParseError(f"line {lineno}: header must be 'n m'") from None
    if n < 0 or m < 0:
        raise GraphParseError(f"line {lineno}: negative header value")
    body = rows[1:]
    if len(body) != m:
        raise GraphParseError(f"line {lineno}: header announces {m} edges, found {len(body)}")
    seen = set()
    edges = []
    for lineno, parts in body:
        if len(parts) != 2:
            raise GraphParseError(f"line {lineno}: expected 'u v'")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphParseError(f"line {lineno}: non-integer vertex id") from None
        if not (0 <= u < n and 0 <= v < n):
            raise GraphParseError(f"line {lineno}: vertex id out of range")
        if u == v:
            raise GraphParseError(f"line {lineno}: self-loop")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphParseError(f"line {lineno}: duplicate edge")
        seen.add(key)
        edges.append(key)
    return Graph(n, edges)


def dump_graph(g: Graph) -> str:
    out = [f"{g.n} {g.m}"]
    out.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(out) + "\n"


def _from_nx(h: nx.Graph, n: int) -> Graph:
    return Graph(n, sorted((min(u, v), max(u, v)) for u, v in h.edges()))


def generate_graph(model: str, params: dict, seed: int = 0) -> Graph:
    """Deterministic generator: gnm, random_regular, grid, clique_chain, ba, hubs, tiered."""
    seed = int(seed) & ((1 << 64) - 1)
    if model == "gnm":
        n, m = int(params["n"]), int(params["m"])
        if n < 0 or m < 0 or m > n * (n - 1) // 2:
            raise ValueError(f"gnm: need 0 <= m <= n(n-1)/2, got n={n}, m={m}")
        return _from_nx(nx.gnm_random_graph(n, m, seed=seed), n)
    if model == "random_regular":
        n, k = int(params["n"]), int(params["k"])
        if (n * k) % 2 or k >= n or k < 0:
            raise ValueError(f"random_regular: infeasible n={n}, k={k}")
        return _from_nx(nx.random_regular_graph(k, n, seed=seed), n)
    if model == "grid":
        r, c = int(params["rows"]), int(params["cols"])
        if r < 1 or c < 1:
            raise ValueError("grid: rows and cols must be positive")
        edges = []
        for i in range(r):
            for j in range(c):
                v = i * c + j
                if j + 1 < c:
                    edges.append((v, v + 1))
                if i + 1 < r:
                    edges.append((v, v + c))
        return Graph(r * c, sorted(edges))
    if model == "clique_chain":
        k, s = int(params["k"]), int(params["size"])
        if k < 1 or s < 2:
            raise ValueError("clique_chain: need k >= 1 and size >= 2")
        # consecutive cliques share one cut vertex
        n = k * (s - 1) + 1
        edges = set()
        for b in range(k):
            members = range(b * (s - 1), b * (s - 1) + s)
            for a in members:
                for c in members:
                    if a < c:
                        edges.add((a, c))
        return Graph(n, sorted(edges))
    if model == "ba":
        n, k = int(params["n"]), int(params.get("k", 1))
        if not 1 <= k < max(n, 2):
            raise ValueError(f"ba: need 1 <= k < n, got n={n}, k={k}")
        return _from_nx(nx.barabasi_albert_graph(n, k, seed=seed), n)
    if model == "hubs":
        return _hubs(int(params["n"]), int(params["k"]), int(params.get("r", 2)), int(params.get("extra", 0)), seed)
    if model == "tiered":
        return _tiered(int(params["n"]), int(params.get("fan", 6)), int(params.get("q", 50)), int(params.get("extra", 0)), seed)
    raise ValueError(f"unknown graph model {model!r}")


def _add_noise(rng: random.Random, E: set, pool: list, extra: int) -> None:
    room = len(pool) * (len(pool) - 1) // 2 - sum(1 for a, b in E if a in pool and b in pool)
    extra = min(extra, max(room, 0))
    while extra > 0:
        a, b = sorted(rng.sample(pool, 2))
        if (a, b) not in E:
            E.add((a, b))
            extra -= 1


def _hubs(n: int, k: int, r: int, extra: int, seed: int) -> Graph:
    """k hubs on a random tree; every other vertex links to r random hubs; extra random spoke-spoke edges."""
    if not 1 <= k <= n or r < 1:
        raise ValueError(f"hubs: need 1 <= k <= n and r >= 1, got n={n}, k={k}, r={r}")
    rng = random.Random(seed)
    E = set()
    for v in range(1, k):
        E.add((rng.randrange(v), v))
    for v in range(k, n):
        for h in rng.sample(range(k), min(r, k)):
            E.add((h, v))
    if n - k >= 2:
        _add_noise(rng, E, list(range(k, n)), extra)
    return Graph(n, sorted(E))


def _tiered(n: int, fan: int, q: int, extra: int, seed: int) -> Graph:
    """Random bushy tree (fan-out up to 2*fan), chords to grandparents with probability q%, extra random edges."""
    if n < 1 or fan < 1:
        raise ValueError("tiered: need n >= 1 and fan >= 1")
    rng = random.Random(seed)
    E = set()
    par = [-1] * n
    nxt, frontier = 1, [0]
    while nxt < n:
        grown = []
        for u in frontier:
            for _ in range(rng.randint(1, 2 * fan)):
                if nxt >= n:
                    break
                par[nxt] = u
                E.add((u, nxt))
                grown.append(nxt)
                nxt += 1
        frontier = grown
    for v in range(n):
        if par[v] >= 0 and par[par[v]] >= 0 and rng.random() * 100 < q:
            E.add((par[par[v]], v))
    if n >= 2:
        _add_noise(rng, E, list(range(n)), extra)
    return Graph(n, sorted(E))


def parse_generator_spec(spec: str) -> tuple[str, dict]:
    """Parse ``model:key=val,key=val`` (the part after ``gen:``)."""
    model, _, rest = spec.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise ValueError(f"bad generator parameter {item!r}")
        params[key.strip()] = int(val)
    return model.strip(), params


def sparsify(g: Graph, dstar: int) -> Graph:
    """Union of dstar+1 successive scan-first (BFS) forests.

    Each forest is a scan-first search forest of the edges left over by the
    previous ones, which preserves connectivity under any dstar vertex failures.
    """
    if dstar < 1:
        raise ValueError("dstar must be >= 1")
    used = [False] * g.m
    keep = []
    for _ in range(dstar + 1):
        mark = [False] * g.n
        found = False
        for root in range(g.n):
            if mark[root]:
                continue
            mark[root] = True
            queue = deque([root])
            while queue:
                x = queue.popleft()
                for e in sorted(i for i in g.adj_edges[x] if not used[i]):
                    a, b = g.edges[e]
                    y = b if a == x else a
                    if not mark[y]:
                        mark[y] = True
                        used[e] = True
                        keep.append(e)
                        found = True
                        queue.append(y)
        if not found:
            break
    keep.sort()
    return Graph(g.n, [g.edges[i] for i in keep], [g.ids[i] for i in keep])


@dataclass
class SpanningForest:
    parent: list
    edgeset: frozenset
    roots: list = field(default_factory=list)


def spanning_forest(g: Graph) -> SpanningForest:
    parent: list = [None] * g.n
    seen = [False] * g.n
    chosen = []
    roots = []
    for r in range(g.n):
        if seen[r]:
            continue
        roots.append(r)
        seen[r] = True
        queue = deque([r])
        while queue:
            x = queue.popleft()
            for y, e in zip(g.adj[x], g.adj_edges[x]):
                if not seen[y]:
                    seen[y] = True
                    parent[y] = x
                    chosen.append(e)
                    queue.append(y)
    return SpanningForest(parent, frozenset(chosen), roots)


@dataclass
class EulerOrder:
    """First-occurrence order of a rooted tree.

    ``end[p]`` is the last position inside the subtree rooted at position ``p``
    and ``parent_pos[p]`` the position of its parent (-1 at the root).
    """

    order: list
    position: dict
    parent_pos: list
    end: list

    def __len__(self) -> int:
        return len(self.order)


def euler_order_from_adjacency(tree_adj: dict, root: int) -> EulerOrder:
    """Preorder DFS, children in ascending vertex order."""
    order = []
    parent_pos = []
    position = {}
    stack = [(root, -1)]
    while stack:
        v, pp = stack.pop()
        position[v] = len(order)
        order.append(v)
        parent_pos.append(pp)
        me = position[v]
        kids = [w for w in tree_adj.get(v, ()) if w not in position]
        for w in sorted(kids, reverse=True):
            stack.append((w, me))
    end = list(range(len(order)))
    for p in range(len(order) - 1, 0, -1):
        q = parent_pos[p]
        if end[p] > end[q]:
            end[q] = end[p]
    return EulerOrder(order, position, parent_pos, end)


def euler_first_occurrence(f: SpanningForest, root: int) -> EulerOrder:
    if f.parent[root] is not None:
        raise ValueError(f"{root} is not a root of the forest")
    kids: dict = {}
    for v, p in enumerate(f.parent):
        if p is not None:
            kids.setdefault(p, []).append(v)
    return euler_order_from_adjacency(kids, root)


def _norm_edges(failedE) -> set:
    return {(min(a, b), max(a, b)) for a, b in failedE}


def component_labels(g: Graph, failedV=(), failedE=()) -> list:
    """Label every vertex by its connected component in g minus the failures; failed vertices get -1."""
    dead = set(failedV)
    bad = _norm_edges(failedE)
    label = [-1] * g.n
    nxt = 0
    for s in range(g.n):
        if label[s] >= 0 or s in dead:
            continue
        label[s] = nxt
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y in g.adj[x]:
                if label[y] < 0 and y not in dead and (min(x, y), max(x, y)) not in bad:
                    label[y] = nxt
                    queue.append(y)
        nxt += 1
    return label


def connected_bfs(g: Graph, failedV, failedE, u: int, v: int) -> bool:
    dead = set(failedV)
    if u in dead or v in dead:
        raise ValueError("query vertex is failed")
    if u == v:
        return True
    bad = _norm_edges(failedE)
    seen = {u}
    queue = deque([u])
    while queue:
        x = queue.popleft()
        for y in g.adj[x]:
            if y in seen or y in dead or (min(x, y), max(x, y)) in bad:
                continue
            if y == v:
                return True
            seen.add(y)
            queue.append(y)
    return False
