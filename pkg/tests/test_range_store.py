import random

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import from_nx
from faultoracle.graph_core import Graph, UnionFind, component_labels, euler_first_occurrence, euler_order_from_adjacency, spanning_forest
from faultoracle.range_store import ForestOracle, RangeTree2D, build_et, enumerate_range, locate, split_intervals

# two rooted trees, vertices 0..11 and 12..20, ids follow first-occurrence order
T1 = {0: [1], 1: [2, 7], 2: [3, 4, 5, 6], 7: [8, 9, 10, 11]}
T2 = {12: [13, 19], 13: [14, 15, 16, 17, 18], 19: [20]}
CROSS = [(0, 14), (4, 12), (8, 20), (5, 19), (10, 15), (1, 13)]


def _adj(tree):
    out = {}
    for p, kids in tree.items():
        for k in kids:
            out.setdefault(p, []).append(k)
            out.setdefault(k, []).append(p)
    return out


@pytest.fixture
def two_trees():
    e1 = euler_order_from_adjacency(_adj(T1), 0)
    e2 = euler_order_from_adjacency(_adj(T2), 12)
    assert e1.order == list(range(12)) and e2.order == list(range(12, 21))
    pts = [((1, e1.position[u]), (2, e2.position[v]), (u, v)) for u, v in CROSS]
    et = build_et(pts, {1: 12, 2: 9})
    return e1, e2, et


def test_directory_examples(two_trees):
    assert build_et([], {0: 3}).directory == {}
    one = build_et([((0, 0), (0, 2), "e")], {0: 3})
    assert list(one.directory) == [(0, 0)] and len(one.directory[(0, 0)]) == 1
    _, _, et = two_trees
    assert list(et.directory) == [(1, 2)] and len(et.pair(2, 1)) == 6


def test_bad_endpoint():
    with pytest.raises(ValueError):
        build_et([((0, 5), (0, 1), None)], {0: 3})


def test_two_tree_split_and_queries(two_trees):
    e1, e2, et = two_trees
    s1 = split_intervals(e1, (), [(1, 2)], tree=1)
    s2 = split_intervals(e2, (), [(12, 13)], tree=2)
    assert list(zip(s1.lefts, s1.rights)) == [(0, 1), (2, 6), (7, 11)]
    assert list(zip(s2.lefts, s2.rights)) == [(0, 0), (1, 6), (7, 8)]
    assert len(s1.subtrees()) == 2 and len(s2.subtrees()) == 2
    assert locate(s1, 0, e1) == locate(s1, 11, e1) != locate(s1, 4, e1)
    keys = [(1, lab) for lab in s1.subtrees()] + [(2, lab) for lab in s2.subtrees()]
    idx = {k: i for i, k in enumerate(keys)}
    uf = UnionFind(len(idx))
    boxes = 0
    for a in range(len(s1)):
        for b in range(len(s2)):
            hit, _ = enumerate_range(et, (1, 2), (s1.lefts[a], s1.rights[a], s2.lefts[b], s2.rights[b]))
            boxes += 1
            if hit is not None:
                uf.union(idx[(1, s1.labels[a])], idx[(2, s2.labels[b])])
    assert boxes == 9
    tree_edges = [(p, k) for t in (T1, T2) for p, ks in t.items() for k in ks]
    g = Graph(21, tree_edges + CROSS)
    lab = component_labels(g, (), [(1, 2), (12, 13)])
    reps = {(1, lab_k): e1.order[lab_k] for lab_k in s1.subtrees()} | {(2, lab_k): e2.order[lab_k] for lab_k in s2.subtrees()}
    for x in keys:
        for y in keys:
            assert (uf.find(idx[x]) == uf.find(idx[y])) == (lab[reps[x]] == lab[reps[y]])


def test_range_tree_empty_and_single():
    rt = RangeTree2D([(1, 1, "a"), (3, 4, "b")])
    assert rt.first_accepted(5, 9, 0, 9) == (None, 0)
    assert rt.first_accepted(2, 3, 0, 9) == ("b", 0)
    assert rt.first_accepted(0, 9, 0, 9, reject=lambda p: p == "a") == ("b", 1)


@given(st.lists(st.tuples(st.integers(0, 40), st.integers(0, 40)), max_size=120),
       st.tuples(st.integers(0, 40), st.integers(0, 40), st.integers(0, 40), st.integers(0, 40)),
       st.integers(0, 5))
def test_range_tree_matches_scan(pts, box, mod):
    x1, x2 = sorted(box[:2])
    y1, y2 = sorted(box[2:])
    rt = RangeTree2D([(x, y, k) for k, (x, y) in enumerate(pts)])
    inside = {k for k, (x, y) in enumerate(pts) if x1 <= x <= x2 and y1 <= y <= y2}
    assert set(rt.report(x1, x2, y1, y2)) == inside
    reject = (lambda k: k % (mod + 1) == 0) if mod else None
    hit, rejected = rt.first_accepted(x1, x2, y1, y2, reject)
    accepted = {k for k in inside if reject is None or not reject(k)}
    if accepted:
        assert hit in accepted
    else:
        assert hit is None and rejected == len(inside)


def test_no_removals_one_interval():
    g = from_nx(nx.balanced_tree(2, 3))
    eo = euler_first_occurrence(spanning_forest(g), 0)
    assert len(split_intervals(eo)) == 1


def test_path7_middle():
    g = from_nx(nx.path_graph(7))
    eo = euler_first_occurrence(spanning_forest(g), 0)
    iset = split_intervals(eo, [3])
    assert len(iset) == 2 and len(iset.subtrees()) == 2
    with pytest.raises(ValueError):
        locate(iset, 3, eo)


def test_locate_matches_tree_bfs_on_path20():
    g = from_nx(nx.path_graph(20))
    eo = euler_first_occurrence(spanning_forest(g), 0)
    rng = random.Random(4)
    for _ in range(200):
        dead = rng.sample(range(20), rng.randint(0, 6))
        iset = split_intervals(eo, dead)
        lab = component_labels(g, dead)
        alive = [v for v in range(20) if v not in dead]
        for u in alive:
            for v in alive:
                assert (locate(iset, u, eo) == locate(iset, v, eo)) == (lab[u] == lab[v])


def test_not_a_tree_edge():
    g = from_nx(nx.path_graph(4))
    eo = euler_first_occurrence(spanning_forest(g), 0)
    with pytest.raises(ValueError):
        split_intervals(eo, (), [(0, 2)])


@given(st.integers(0, 10_000))
def test_forest_oracle_against_bfs(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 40)
    g = from_nx(nx.gnm_random_graph(n, rng.randint(0, 2 * n), seed=seed), n)
    fo = ForestOracle(g)
    dv = rng.sample(range(n), rng.randint(0, min(3, n - 1)))
    de = rng.sample(g.edges, rng.randint(0, min(4, g.m)))
    fo.delete(dv, de)
    lab = component_labels(g, dv, de)
    alive = [v for v in range(n) if v not in dv]
    for u in alive:
        for v in alive[:8]:
            assert fo.connected(u, v) == (lab[u] == lab[v])
