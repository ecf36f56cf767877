import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arboreal.coloring import construct_scale_coloring, quality, singleton_coloring
from arboreal.embedding import (
    PointEmbedding,
    bounds_report,
    distortion,
    edge_lipschitz,
    extend_to_subdivision,
    leaf_pad_embedding,
    matousek_bounds,
    matousek_embedding,
    pad_leaves,
    rtree_distance,
    simple_coloring_embedding,
    subdivision_metric,
    use_delta_strong_violations,
)
from arboreal.generators import complete_binary_tree, random_tree, sst
from arboreal.tree_core import InputError, PreconditionError, WeightedRootedTree

from conftest import trees


def brute_distortion(emb, tree):
    worst_hi, worst_lo = 0.0, math.inf
    for u, v in itertools.combinations(tree.order, 2):
        a, b = emb.coords[u], emb.coords[v]
        diff = [a.get(k, 0.0) - b.get(k, 0.0) for k in set(a) | set(b)]
        r = sum(abs(x) ** emb.p for x in diff) ** (1 / emb.p) / tree.distance(u, v)
        worst_hi, worst_lo = max(worst_hi, r), min(worst_lo, r)
    return worst_hi / worst_lo


def test_b1_simple():
    t = complete_binary_tree(1)
    emb = simple_coloring_embedding(t, singleton_coloring(t), 2)
    assert distortion(emb, t).distortion == pytest.approx(math.sqrt(2))


def test_path_matousek_isometric_shape():
    # one color class: a single coordinate d^(1/2) s^(1/2) with s = d(1 - delta/2)
    t = sst([1] * 5 + [0])
    col = {v: 0 for v in t.parent}
    emb = matousek_embedding(t, col, 0.5, 2)
    leaf = t.leaves()[0]
    assert emb.coords[leaf]["c0"] == pytest.approx(math.sqrt(3) / 2 * 5)
    assert distortion(emb, t).distortion == pytest.approx(1.0)


def test_embedding_json_roundtrip():
    t = random_tree(12, seed=2)
    emb = simple_coloring_embedding(t, construct_scale_coloring(t, 2).coloring, 3)
    back = PointEmbedding.from_json(emb.to_json())
    assert back.coords == emb.coords and back.p == emb.p
    with pytest.raises(InputError):
        PointEmbedding.from_json({"coords": {}})


@settings(max_examples=40, deadline=None)
@given(trees(max_n=20), st.sampled_from([1.0, 2.0, 3.0]))
def test_distortion_matches_bruteforce(t, p):
    if len(t) < 2:
        return
    emb = simple_coloring_embedding(t, construct_scale_coloring(t, 2).coloring, p)
    assert distortion(emb, t).distortion == pytest.approx(brute_distortion(emb, t), rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(trees(max_n=20), st.sampled_from([1.0, 2.0, 4.0]))
def test_simple_embedding_bound(t, p):
    if len(t) < 2:
        return
    col = construct_scale_coloring(t, 2).coloring
    eps = quality(t, col, strong=False).goodness
    cert = distortion(simple_coloring_embedding(t, col, p), t)
    assert cert.distortion <= 2 ** (1 / p) / eps + 1e-9


def _oracle_matousek(t, col, delta, v):
    edges = t.root_path(v)[1:]
    classes = []
    for e in edges:
        if classes and classes[-1][0] == col[e]:
            classes[-1][1] += t.edge_length[e]
        else:
            classes.append([col[e], t.edge_length[e]])
    out = {}
    for i, (k, di) in enumerate(classes):
        s = sum(max(0.0, classes[j][1] - delta / 2 * sum(c[1] for c in classes[i:j + 1]))
                for j in range(i, len(classes)))
        out[f"c{k}"] = math.sqrt(di * s)
    return out


@settings(max_examples=30, deadline=None)
@given(trees(max_n=20), st.sampled_from([1.0, 2.0, 4.0]))
def test_matousek_certificate(t, p):
    if len(t) < 2:
        return
    col = construct_scale_coloring(t, 2).coloring
    sd = quality(t, col).strong_delta
    delta = min(sd, 0.5)
    emb = matousek_embedding(t, col, delta, p, strong_delta=sd)
    if p == 2:
        for v in t.order:
            want = _oracle_matousek(t, col, delta, v)
            assert emb.coords[v] == pytest.approx(want, rel=1e-12)
    assert use_delta_strong_violations(emb) == []
    cert = distortion(emb, t)
    b = matousek_bounds(delta, p)
    assert cert.lip <= b["lip"] * (1 + 1e-9)
    assert edge_lipschitz(emb, t) <= b["lip_edge"] * (1 + 1e-9)
    assert 1 / cert.colip <= 48
    assert cert.distortion <= b["distortion"] * (1 + 1e-9)


def test_matousek_preconditions():
    t = complete_binary_tree(3)
    col = singleton_coloring(t)
    sd = quality(t, col).strong_delta
    with pytest.raises(PreconditionError):
        matousek_embedding(t, col, 0.6, 2)
    with pytest.raises(PreconditionError):
        matousek_embedding(t, col, sd * 2, 2, strong_delta=sd)
    emb = matousek_embedding(t, col, sd, 1)
    assert emb.p == 2 and emb.meta["routed_to_p2"]


def test_rtree_distance_on_subdivided_edge():
    t = WeightedRootedTree.from_edges("r", [("r", "a", 4.0), ("a", "b", 2.0), ("r", "c", 1.0)])
    assert rtree_distance(t, ("a", 0.25), "r") == 1.0
    assert rtree_distance(t, ("a", 0.25), ("b", 0.5)) == 3.0 + 1.0
    assert rtree_distance(t, ("a", 0.25), ("c", 1.0)) == 2.0
    assert rtree_distance(t, ("a", 0.5), ("a", 0.75)) == 1.0


def _extension_factor(t, variant, etas, p=2):
    col = construct_scale_coloring(t, 2).coloring
    f = simple_coloring_embedding(t, col, p)
    base = distortion(f, t).distortion
    samples = [(e, eta) for e in sorted(t.parent) for eta in etas]
    g = extend_to_subdivision(t, f, samples, variant)
    met = subdivision_metric(t, samples)
    sub = PointEmbedding(g.p, {x: g.coords[x] for x in met.points})
    return distortion(sub, met).distortion / base


@pytest.mark.parametrize("seed", range(5))
def test_tent_extension_factor(seed):
    t = random_tree(15, ("uniform", 0.5, 2.0), seed=seed)
    assert _extension_factor(t, "tent", [1e-6, 0.3, 0.5, 0.8, 1 - 1e-6]) <= 5


def test_printed_extension_not_lipschitz_near_child_end():
    # the literal weight eta leaves a gap of about l near the child end
    t = random_tree(15, ("uniform", 0.5, 2.0), seed=0)
    assert _extension_factor(t, "printed", [0.5, 1 - 1e-6]) > 50


def test_leaf_padding():
    t = complete_binary_tree(2)
    f = simple_coloring_embedding(t, singleton_coloring(t), 2)
    pads = {"r/0/0": 1.0, "r/1/1": 2.0}
    tp = pad_leaves(t, pads)
    g = leaf_pad_embedding(t, f, pads)
    assert len(tp) == len(t) + 2
    assert distortion(g, tp).distortion == pytest.approx(brute_distortion(g, tp))


def test_bounds_report_labels():
    t = complete_binary_tree(3)
    col = construct_scale_coloring(t, 2).coloring
    rep = bounds_report(t, 2.0, 2.0, measured=quality(t, col), k_lower=0)
    assert rep["lower_from_binary"]["label"] == "no lower bound"
    assert rep["simple_embedding_upper"]["label"] == "formula"
    with pytest.raises(InputError):
        bounds_report(t, 1.0, 2.0)
