import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from faultoracle.graph_core import Graph, component_labels, generate_graph
from faultoracle.mc_edge_oracle import Feistel, MCEdgeOracle, label_bits


@given(st.sampled_from([2, 8, 16, 28, 64]), st.integers(0, 2**32))
def test_feistel_is_a_permutation(bits, seed):
    f = Feistel(bits, np.random.default_rng(seed))
    xs = random.Random(seed).sample(range(1 << min(bits, 20)), min(200, 1 << min(bits, 20)))
    ys = [f.forward(x) for x in xs]
    assert len(set(ys)) == len(ys)
    assert all(y >> bits == 0 for y in ys)
    assert [f.inverse(y) for y in ys] == xs


def test_feistel_rejects_odd_width():
    with pytest.raises(ValueError):
        Feistel(7, np.random.default_rng(0))


def test_label_bits():
    assert label_bits(512, 4) == 36
    assert label_bits(2, 1) == 2
    assert label_bits(10**6, 8) == 64


def test_empty_graph_prefixes_zero():
    o = MCEdgeOracle(Graph(5, []), seed=1)
    assert not o.mu.any()


def test_single_edge_touches_two_positions():
    g = Graph(6, [(1, 4)])
    o = MCEdgeOracle(g, seed=2)
    per_pos = o.mu[1:] ^ o.mu[:-1]
    nonzero = [k for k in range(g.n) if per_pos[k].any()]
    assert nonzero == sorted((o.pos[1], o.pos[4]))


def test_rebuild_identical():
    g = generate_graph("gnm", {"n": 100, "m": 300}, 3)
    a, b = MCEdgeOracle(g, seed=9), MCEdgeOracle(g, seed=9)
    assert np.array_equal(a.mu, b.mu) and a.phi == b.phi


def test_no_failures():
    g = generate_graph("gnm", {"n": 60, "m": 200}, 4)
    s = MCEdgeOracle(g, seed=4).delete([])
    assert s.stats["intervals"] == 0 and s.stats["list_size"] == 0
    lab = component_labels(g)
    assert all(s.query(u, v) == (lab[u] == lab[v]) for u in range(60) for v in range(0, 60, 7))


def test_path_tree_edge_cut():
    g = Graph(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
    s = MCEdgeOracle(g, seed=1).delete([(2, 3)])
    assert s.stats["intervals"] == 2 and s.status == "ok"
    assert s.query(0, 2) and s.query(3, 4) and not s.query(1, 4)


def test_rejects_bad_input():
    g = Graph(4, [(0, 1), (1, 2)])
    o = MCEdgeOracle(g, seed=0)
    with pytest.raises(ValueError):
        o.delete([(0, 3)])
    with pytest.raises(ValueError):
        o.delete([(0, 1), (1, 0)])
    with pytest.raises(ValueError):
        o.delete([(2, 2)])


@pytest.mark.parametrize("strict", [False, True])
@pytest.mark.parametrize("model,params", [
    ("gnm", {"n": 400, "m": 1000}),
    ("grid", {"rows": 16, "cols": 20}),
    ("random_regular", {"n": 300, "k": 3}),
])
def test_agreement(model, params, strict):
    g = generate_graph(model, params, 13)
    o = MCEdgeOracle(g, seed=13, strict=strict)
    rng = random.Random(13)
    wrong = total = 0
    for _ in range(30):
        D = rng.sample(g.edges, rng.randint(0, 32))
        s = o.delete(D)
        assert s.stats["list_size"] == 2 * s.stats["intervals"] + 2 * len(D)
        lab = component_labels(g, (), D)
        for _ in range(20):
            u, v = rng.randrange(g.n), rng.randrange(g.n)
            total += 1
            wrong += s.status != "ok" or s.query(u, v) != (lab[u] == lab[v])
    assert wrong / total <= 0.01


@given(st.integers(0, 10**6))
def test_agreement_property(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 60)
    g = generate_graph("gnm", {"n": n, "m": rng.randint(0, min(3 * n, n * (n - 1) // 2))}, seed)
    D = rng.sample(g.edges, rng.randint(0, min(10, g.m)))
    s = MCEdgeOracle(g, seed=seed).delete(D)
    lab = component_labels(g, (), D)
    if s.status == "ok":
        for u in range(n):
            v = rng.randrange(n)
            assert s.query(u, v) == (lab[u] == lab[v])
    assert s.stats["max_member_probes"] <= s.stats["probe_budget"]


def test_strict_mode_false_validation_rate():
    g = generate_graph("gnm", {"n": 256, "m": 700}, 5)
    o = MCEdgeOracle(g, seed=5, strict=True)
    rng = random.Random(5)
    stats = [o.delete(rng.sample(g.edges, 16)).stats for _ in range(20)]
    false = sum(st["false_validations"] for st in stats)
    recovered = sum(st["recovered"] for st in stats)
    assert o.phi_inv is None and recovered > 0
    assert false / recovered <= 0.05


def test_probe_counter_linear_in_d():
    g = generate_graph("gnm", {"n": 512, "m": 1536}, 7)
    o = MCEdgeOracle(g, seed=3)
    rng = random.Random(1)
    per_d = []
    for d in (4, 8, 16, 32):
        per_d.append(np.mean([o.delete(rng.sample(g.edges, d)).stats["probes"] for _ in range(30)]) / d)
    assert max(per_d) / min(per_d) <= 2
