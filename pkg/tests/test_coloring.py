import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arboreal.coloring import (
    binary_profile,
    check_claim_g,
    check_monotone,
    check_reasonable,
    color_classes,
    construct_scale_coloring,
    eps_delta_strong_check,
    is_regular,
    monochromatic_path_coloring,
    quality,
    reasonable_coloring,
    recompute_g,
    regularize_coloring,
    relation_delta,
    scaled_binary_subtree,
    singleton_coloring,
    witness_distortion,
)
from arboreal.generators import complete_binary_tree, comb, random_tree, sst
from arboreal.tree_core import PreconditionError, WeightedRootedTree

from conftest import trees


@st.composite
def colored_trees(draw, max_n=18):
    t = draw(trees(max_n=max_n))
    col, nxt = {}, 0
    for v in t.order:
        kids = t.children[v]
        cont = draw(st.sampled_from([None] + list(kids))) if kids and v != t.root else None
        for z in kids:
            if z == cont:
                col[z] = col[v]
            else:
                col[z] = nxt
                nxt += 1
    return t, col


def _runs(t, col, u, v):
    """Class lengths along P(u, v) computed from the edge list."""
    out = {}
    for e in t.path_edges(u, v):
        out[col[e]] = out.get(col[e], 0.0) + t.edge_length[e]
    return out


def oracle_quality(t, col):
    g = s = math.inf
    for u, v in itertools.combinations(t.order, 2):
        d = t.distance(u, v)
        lens = sorted(_runs(t, col, u, v).values(), reverse=True)
        g = min(g, lens[0] / d)
        acc = 0.0
        for x in lens:
            acc += x
            if acc >= d / 2 * (1 - 1e-12):
                s = min(s, x / d)
                break
    return min(g, 1.0), min(s, 1.0)


def test_path_values():
    path = sst([1] * 6 + [0])
    assert quality(path, monochromatic_path_coloring(path)).goodness == 1.0
    q = quality(path, singleton_coloring(path))
    assert q.goodness == pytest.approx(1 / 6)


def test_not_monotone_rejected():
    t = complete_binary_tree(2)
    level = {v: t.level[v] for v in t.parent}
    assert not check_monotone(t, level)[0]
    with pytest.raises(PreconditionError):
        quality(t, level)


@settings(max_examples=80, deadline=None)
@given(colored_trees())
def test_quality_matches_bruteforce(tc):
    t, col = tc
    if len(t) < 2:
        return
    q = quality(t, col)
    g, s = oracle_quality(t, col)
    assert q.goodness == pytest.approx(g, rel=1e-12)
    assert q.strong_delta == pytest.approx(s, rel=1e-12)


@settings(max_examples=80, deadline=None)
@given(colored_trees())
def test_good_implies_strong(tc):
    t, col = tc
    if len(t) < 2:
        return
    q = quality(t, col)
    assert q.strong_delta >= relation_delta(q.goodness) * (1 - 1e-12)


@settings(max_examples=60, deadline=None)
@given(colored_trees(), st.sampled_from([0.05, 0.1, 0.2, 0.3]))
def test_eps_delta_strong_implies_strong(tc, delta):
    t, col = tc
    if len(t) < 2:
        return
    _, _, frac = eps_delta_strong_check(t, col, 1.0, delta)
    eps = min(1.0, frac)
    if eps < delta:
        return
    assert eps_delta_strong_check(t, col, eps, delta)[0]
    assert quality(t, col).strong_delta >= (delta / (4 * eps)) ** (3 / eps) * (1 - 1e-12)


@settings(max_examples=25, deadline=None)
@given(trees(max_n=20), st.sampled_from([1.5, 2.0, 4.0]))
def test_scale_coloring_invariants(t, c):
    sc = construct_scale_coloring(t, c)
    assert check_monotone(t, sc.coloring)[0]
    assert set(sc.coloring) == set(t.parent)
    assert recompute_g(t, sc.coloring, c) == sc.g
    assert check_claim_g(t, sc, c) == []


def test_scale_coloring_tie_break():
    # identical children: the lexicographically smallest continues the color
    t = WeightedRootedTree.from_edges("r", [("r", "a", 1.0), ("a", "x", 1.0), ("a", "y", 1.0)])
    col = construct_scale_coloring(t, 2.0).coloring
    assert col["x"] == col["a"] != col["y"]


@pytest.mark.parametrize("k", [2, 4, 6])
def test_binary_profile_on_binary_trees(k):
    bp = binary_profile(complete_binary_tree(k), 2.0)
    assert bp.k_lower >= k
    assert bp.witness_distortion < 2.0


@settings(max_examples=30, deadline=None)
@given(trees(max_n=25), st.sampled_from([(1.0, 1.9), (2.0, 3.5), (0.5, 4.0)]))
def test_scaled_binary_witness_is_valid(t, win):
    if len(t) < 2:
        return
    L, U = win
    w = scaled_binary_subtree(t, L, U)
    if w.k <= 0:
        return
    nm = w.node_map
    for lab, x in nm.items():
        if lab:
            par = nm[lab[:-1]]
            assert t.is_ancestor(par, x)
            assert L * (1 - 1e-12) <= t.distance(par, x) <= U * (1 + 1e-12)
    lip, colip, dist = witness_distortion(t, w)
    # path-image copies: distortion is at most the window ratio
    assert dist <= U / L * (1 + 1e-9)


def _oracle_reasonable(t, pal):
    worst = math.inf
    for u, v in itertools.combinations(t.order, 2):
        w = t.lca(u, v)
        a, b = _runs(t, pal, w, u) if u != w else {}, _runs(t, pal, w, v) if v != w else {}
        diff = max(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in set(a) | set(b))
        worst = min(worst, diff / t.distance(u, v))
    return worst


@pytest.mark.parametrize("seed", range(4))
def test_reasonable_pipeline(seed):
    t = random_tree(14, ("dyadic", 0, 3), seed=seed)
    col = regularize_coloring(t, construct_scale_coloring(t, 2.0).coloring)
    assert is_regular(t, col) and check_monotone(t, col)[0]
    eps = quality(t, col, strong=False).goodness
    rc = reasonable_coloring(t, col, eps)
    assert rc.audit_ok
    ok, _, ratio = check_reasonable(t, rc.palette_coloring, eps / 4)
    assert ok
    assert ratio == pytest.approx(_oracle_reasonable(t, rc.palette_coloring), rel=1e-9)


def test_regularize_refines():
    t = WeightedRootedTree.from_edges("r", [("r", "a", 1.0), ("a", "b", 5.0), ("b", "c", 1.0)])
    col = {"a": 0, "b": 0, "c": 0}
    assert not is_regular(t, col)
    new = regularize_coloring(t, col)
    assert is_regular(t, new)
    for es in color_classes(t, new).values():
        assert len({col[e] for e in es}) == 1


def test_reasonable_requires_regular():
    t = WeightedRootedTree.from_edges("r", [("r", "a", 1.0), ("a", "b", 5.0)])
    with pytest.raises(PreconditionError):
        reasonable_coloring(t, {"a": 0, "b": 0}, 0.5)


def test_comb_goodness_floor():
    # combs keep a sizeable monochromatic spine piece on every pair
    t = comb(60)
    assert quality(t, construct_scale_coloring(t, 2.0).coloring, strong=False).goodness >= 0.1
