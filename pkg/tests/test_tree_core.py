import itertools
import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arboreal.generators import complete_binary_tree, random_tree
from arboreal.tree_core import (
    FiniteMetric,
    InputError,
    PreconditionError,
    WeightedRootedTree,
    doubling_constant,
    four_point_check,
    normalize_height,
    query,
    unit_subdivide,
    upward_r_net,
    validate_upward_net,
)

from conftest import nx_graph, trees


def small():
    return WeightedRootedTree.from_edges("r", [("r", "a", 1.0), ("r", "b", 2.0), ("a", "c", 3.0), ("a", "d", 0.5)])


def test_basic_queries():
    t = small()
    assert t.lca("c", "d") == "a"
    assert t.distance("c", "b") == 6.0
    assert t.path("c", "b") == ["c", "a", "r", "b"]
    assert sorted(t.leaves()) == ["b", "c", "d"]
    assert t.height() == 4.0
    q = query(t, "d", "c")
    assert (q.lca, q.distance) == ("a", 3.5)


def test_json_roundtrip():
    t = random_tree(30, ("uniform", 0.5, 2.0), seed=3)
    u = WeightedRootedTree.from_json(t.to_json())
    assert u.to_json() == t.to_json()


@pytest.mark.parametrize("edges", [
    [("r", "a", 1.0), ("a", "r", 1.0)],
    [("r", "a", 1.0), ("r", "a", 2.0)],
    [("r", "a", -1.0)],
    [("r", "a", 0.0)],
    [("r", "a", 1.0), ("x", "y", 1.0)],
])
def test_rejects_bad_edges(edges):
    with pytest.raises(InputError):
        WeightedRootedTree.from_edges("r", edges)


@settings(max_examples=60, deadline=None)
@given(trees())
def test_distance_matches_dijkstra(t):
    g = nx_graph(t)
    D = t.distance_matrix()
    idx = t.index()
    sp = dict(nx.all_pairs_dijkstra_path_length(g))
    for u in t.order:
        for v in t.order:
            assert D[idx[u], idx[v]] == pytest.approx(sp[u][v], abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(trees())
def test_lca_matches_networkx(t):
    g = nx.DiGraph([(p, c) for p, c, _ in t.edges()])
    g.add_node(t.root)
    pairs = list(itertools.combinations(t.order, 2))[:40]
    want = dict(nx.tree_all_pairs_lowest_common_ancestor(g, root=t.root, pairs=pairs))
    for (u, v), w in want.items():
        assert t.lca(u, v) == w


@settings(max_examples=40, deadline=None)
@given(trees(), st.sampled_from([0.5, 1.0, 2.5, 4.0]))
def test_upward_net_properties(t, R):
    net = upward_r_net(t, R)
    assert t.root in net
    assert validate_upward_net(t, net, R)
    # independent check: separation along root paths and covering from above
    for v in net:
        for a in t.ancestors(v)[1:]:
            if a in net:
                assert t.depth[v] - t.depth[a] >= R * (1 - 1e-12)
    for v in t.order:
        assert any(t.depth[v] - t.depth[a] < R * (1 + 1e-12) for a in t.ancestors(v) if a in net)


def test_unit_subdivide_preserves_distances():
    t = WeightedRootedTree.from_edges("r", [("r", "a", 3.0), ("r", "b", 1.0), ("a", "c", 2.0)])
    s = unit_subdivide(t)
    assert len(s) == 7
    for u, v in itertools.combinations(t.order, 2):
        assert s.distance(u, v) == t.distance(u, v)
    with pytest.raises(PreconditionError):
        unit_subdivide(WeightedRootedTree.from_edges("r", [("r", "a", 1.5)]))


def test_normalize_height():
    t = WeightedRootedTree.from_edges("r", [("r", "a", 3.0), ("r", "b", 1.0)])
    nt = normalize_height(t)
    assert nt.height == 4
    assert all(nt.tree.depth[l] == 4 for l in nt.tree.leaves())
    assert nt.leaf_pad == {"a": 1, "b": 3}


def test_four_point():
    assert four_point_check(small().metric()).is_tree_metric
    c4 = FiniteMetric("abcd", [[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]])
    assert not four_point_check(c4).is_tree_metric


def test_metric_validation():
    with pytest.raises(InputError):
        FiniteMetric("abc", [[0, 1, 5], [1, 0, 1], [5, 1, 0]])


def _brute_doubling(metric):
    D, n = metric.dist, len(metric)
    best = 1
    for r in {float(x) for x in np.unique(D) if x > 0}:
        for x in range(n):
            ball = set(np.nonzero(D[x] <= r + 1e-12)[0])
            for k in range(1, n + 1):
                if any(ball <= {j for c in cs for j in np.nonzero(D[c] <= r / 2 + 1e-12)[0]}
                       for cs in itertools.combinations(range(n), k)):
                    best = max(best, k)
                    break
    return best


@pytest.mark.parametrize("t", [
    WeightedRootedTree.from_edges("c", [("c", x, 1.0) for x in "abd"]),
    complete_binary_tree(2),
    random_tree(9, "unit", seed=4),
])
def test_doubling_against_bruteforce(t):
    res = doubling_constant(t.metric())
    assert res.certified
    assert res.value == _brute_doubling(t.metric())


def test_star_doubling_value():
    # a unit star with three leaves: the radius-1 ball at the centre needs four radius-1/2 balls
    star = WeightedRootedTree.from_edges("c", [("c", x, 1.0) for x in "abd"])
    assert doubling_constant(star.metric()).value == 4
