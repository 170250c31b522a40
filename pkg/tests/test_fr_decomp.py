import itertools
import random

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import from_nx
from faultoracle.fr_decomp import decomp, fr_tree, improvement_step
from faultoracle.graph_core import Graph, UnionFind, component_labels, generate_graph, spanning_forest


def _steiner_ok(g, edges, U):
    uf = UnionFind(g.n)
    for e in edges:
        if not uf.union(*g.edges[e]):
            return False
    lab = component_labels(g)
    return all((uf.find(a) == uf.find(b)) == (lab[a] == lab[b]) for a in U for b in U)


def _best_degree(g, U):
    """Minimum max-degree over all Steiner forests of U, by exhaustion."""
    best = None
    for r in range(g.m + 1):
        for sub in itertools.combinations(range(g.m), r):
            if not _steiner_ok(g, sub, U):
                continue
            deg = [0] * g.n
            for e in sub:
                a, b = g.edges[e]
                deg[a] += 1
                deg[b] += 1
            best = max(deg) if best is None else min(best, max(deg))
    return best


def test_path_and_k4():
    T, _ = fr_tree(from_nx(nx.path_graph(9)), range(9))
    assert T.max_degree() <= 3
    T, _ = fr_tree(from_nx(nx.complete_graph(4)), range(4))
    assert T.max_degree() <= 3


def test_star_is_its_own_tree(star9):
    T, B = fr_tree(star9, range(10))
    assert T.max_degree() == 9 and len(T.edges) == 9
    assert 0 in B


def test_empty_terminals_rejected():
    with pytest.raises(ValueError):
        fr_tree(Graph(3, []), [])


def test_within_one_of_optimal_on_small_graphs():
    rng = random.Random(3)
    for it in range(120):
        n = rng.randint(2, 7)
        g = generate_graph("gnm", {"n": n, "m": rng.randint(0, min(9, n * (n - 1) // 2))}, it)
        U = set(rng.sample(range(n), rng.randint(1, n)))
        T, _ = fr_tree(g, U)
        assert _steiner_ok(g, T.edges, U)
        assert T.max_degree() <= _best_degree(g, U) + 1


def test_improvement_none_on_cycle_path():
    g = from_nx(nx.cycle_graph(6))
    path = [g.edge_index(i, i + 1) for i in range(5)]
    assert improvement_step(g, path, range(6)) is None


def test_single_swap_lowers_hub():
    # hub 0 with four leaves, leaves 1 and 2 also adjacent
    g = Graph(5, [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2)])
    star = [g.edge_index(0, k) for k in range(1, 5)]
    T = improvement_step(g, star, range(5))
    assert T is not None
    assert T.degree[0] == 3 and T.max_degree() == 3
    assert _steiner_ok(g, T.edges, range(5))


def test_iterated_improvement_monotone():
    g = generate_graph("gnm", {"n": 16, "m": 40}, 5)
    cur = sorted(spanning_forest(g).edgeset)
    pot = None
    for _ in range(200):
        nxt = improvement_step(g, cur, range(16))
        if nxt is None:
            break
        deg = sorted(nxt.degree.values(), reverse=True)
        assert pot is None or deg[0] <= pot
        pot = deg[0]
        cur = sorted(nxt.edges)
    else:
        pytest.fail("no fixpoint")


def test_decomp_examples(star9):
    c5 = from_nx(nx.cycle_graph(5))
    assert decomp(c5, range(5), 3).bad == frozenset()
    r = decomp(star9, range(10), 4)
    assert r.bad == {0} and len(r.bad) < 10 / 2
    one = decomp(c5, [2], 4)
    assert one.bad == frozenset() and one.forest.edges == frozenset()
    with pytest.raises(ValueError):
        decomp(c5, range(5), 2)


@given(st.integers(0, 10**6), st.sampled_from([3, 4, 5]), st.booleans())
def test_decomp_properties(seed, s, all_terminals):
    rng = random.Random(seed)
    n = rng.randint(2, 60)
    g = generate_graph("gnm", {"n": n, "m": rng.randint(0, min(4 * n, n * (n - 1) // 2))}, seed)
    U = set(range(n)) if all_terminals else set(rng.sample(range(n), rng.randint(1, n)))
    res = decomp(g, U, s)
    T, B = res.forest.edges, res.bad
    deg = {}
    for e in T:
        a, b = g.edges[e]
        if a not in B and b not in B:
            deg[a] = deg.get(a, 0) + 1
            deg[b] = deg.get(b, 0) + 1
    assert max(deg.values(), default=0) <= s
    if B:
        assert len(B) < len(U) / (s - 2)
        assert len(B & U) < len(U) / (s - 1)
    uf_t, uf_g = UnionFind(n), UnionFind(n)
    for e in T:
        a, b = g.edges[e]
        if a not in B and b not in B:
            uf_t.union(a, b)
    for a, b in g.edges:
        if a not in B and b not in B:
            uf_g.union(a, b)
    live = sorted(U - B)
    for a in live:
        for b in live[:10]:
            assert (uf_t.find(a) == uf_t.find(b)) == (uf_g.find(a) == uf_g.find(b))
