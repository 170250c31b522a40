import random
import warnings

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import from_nx
from faultoracle.graph_core import Graph, component_labels, generate_graph
from faultoracle.hierarchy import build_H, build_hierarchy, lambda_edges


def _quiet(g):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return build_hierarchy(g)


def test_low_degree_tree_single_level():
    for g in (from_nx(nx.path_graph(12)), from_nx(nx.cycle_graph(9)), from_nx(nx.balanced_tree(3, 3))):
        h = _quiet(g)
        assert h.p == 0 and h.levels[0][1] == []


def test_star_levels(star9):
    h = _quiet(star9)
    assert h.p == 1
    assert 0 in h.levels[0][1]
    assert h.levels[1][1] == []
    assert h.plevel[0] == 1
    top = [t for t in h.trees if t.level == 1]
    assert len(top) == 1 and top[0].vertices == [0]


def test_bad_sets_halve():
    rng = random.Random(9)
    for k in range(30):
        g = generate_graph("hubs", {"n": rng.randint(40, 200), "k": rng.randint(3, 12), "extra": 20}, k)
        h = _quiet(g)
        prev = g.n
        for _, bad in h.levels:
            assert len(bad) < prev / 2 or not bad
            prev = len(bad)


def test_components_simple_cases():
    h = _quiet(generate_graph("grid", {"rows": 4, "cols": 4}))
    assert len(h.components) == 1 and h.components[0].parent is None
    two = Graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    h = _quiet(two)
    assert len(h.components) == 2 and all(c.parent is None for c in h.components)


@pytest.mark.parametrize("g", [
    generate_graph("clique_chain", {"k": 3, "size": 6}),
    generate_graph("hubs", {"n": 120, "k": 6, "extra": 30}, 2),
    generate_graph("tiered", {"n": 150, "fan": 5, "extra": 10}, 3),
])
def test_component_nesting_matches_bfs(g):
    h = _quiet(g)
    for comp in h.components:
        removed = {v for _, bad in h.levels[comp.level:] for v in bad}
        lab = component_labels(g, removed)
        t = comp.terminals[0]
        assert comp.vertices == {v for v in range(g.n) if lab[v] == lab[t]}
        if comp.parent is not None:
            par = h.components[comp.parent]
            assert par.level > comp.level and comp.vertices < par.vertices
    for v in range(g.n):
        assert v in h.components[h.home(v)].terminals


def test_lambda_small():
    assert lambda_edges(["a"], 1) == []
    got = {frozenset(e) for e in lambda_edges(list("abcd"), 1)}
    assert got == {frozenset(p) for p in ("ab", "ac", "bc", "bd", "cd")}
    with pytest.raises(ValueError):
        lambda_edges([1, 2], 0)


@given(st.integers(2, 40), st.integers(1, 6))
def test_lambda_split_bound(L, dstar):
    edges = lambda_edges(list(range(L)), dstar)
    cap = (dstar + 1) * (dstar + 2) // 2
    for k in range(1, L):
        assert sum(1 for a, b in edges if a < k <= b) <= cap


def test_H_on_low_degree_tree_is_original():
    g = from_nx(nx.balanced_tree(3, 3))
    H = build_H(_quiet(g), 3)
    assert H.n_lambda == 0 and H.n_original == g.m


def test_H_star_leaves(star9):
    # every leaf component sees only the hub, so its adjacency list has one entry
    h = _quiet(star9)
    leaves = [c for c in h.components if c.level == 0]
    assert len(leaves) == 9
    for c in leaves:
        assert h.adjacency[c.id].items == [0]
    assert build_H(h, 2).n_lambda == 0


def test_H_bound_random():
    rng = random.Random(5)
    for k in range(100):
        n = rng.randint(10, 120)
        model = rng.choice(["gnm", "hubs", "tiered"])
        if model == "gnm":
            g = generate_graph("gnm", {"n": n, "m": rng.randint(n, 3 * n)}, k)
        elif model == "hubs":
            g = generate_graph("hubs", {"n": n, "k": max(2, n // 10), "extra": n // 4}, k)
        else:
            g = generate_graph("tiered", {"n": n, "extra": n // 8}, k)
        h = _quiet(g)
        dstar = rng.randint(1, 8)
        H = build_H(h, dstar)
        assert len(H.edges) <= H.bound(h, dstar)


def test_adjacency_segments_sorted():
    h = _quiet(generate_graph("hubs", {"n": 150, "k": 8, "extra": 40}, 4))
    for adj in h.adjacency:
        for anc, lo, hi in adj.segments:
            pos = [h.principal(w)[1] for w in adj.items[lo:hi]]
            assert pos == sorted(pos)
            assert all(h.home(w) == anc for w in adj.items[lo:hi])
