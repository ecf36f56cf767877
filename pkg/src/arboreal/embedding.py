"""Coloring-based embeddings of trees into finite-dimensional l_p, with exact certificates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .coloring import ColoringQuality, check_monotone, check_reasonable
from .tree_core import FiniteMetric, InputError, PreconditionError, WeightedRootedTree

INF = math.inf


@dataclass
class PointEmbedding:
    """Sparse coordinates per point; ``coords[v][basis] = value``."""

    p: float
    coords: dict[str, dict[str, float]]
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.p >= 1:
            raise InputError(f"p must be at least 1, got {self.p}")

    def basis(self) -> list[str]:
        return sorted({b for vec in self.coords.values() for b in vec})

    @property
    def dimension(self) -> int:
        return len(self.basis())

    def dense(self, points: Sequence[str]) -> np.ndarray:
        bs = self.basis()
        bi = {b: i for i, b in enumerate(bs)}
        X = np.zeros((len(points), max(1, len(bs))))
        for r, v in enumerate(points):
            if v not in self.coords:
                raise InputError(f"point {v!r} is not embedded")
            for b, x in self.coords[v].items():
                X[r, bi[b]] = x
        return X

    def to_json(self) -> dict:
        return {"p": self.p, "coords": {v: dict(sorted(c.items())) for v, c in sorted(self.coords.items())}}

    @classmethod
    def from_json(cls, data: dict) -> "PointEmbedding":
        try:
            coords = {str(v): {str(b): float(x) for b, x in c.items()} for v, c in data["coords"].items()}
            return cls(float(data["p"]), coords)
        except (KeyError, AttributeError, TypeError, ValueError) as exc:
            raise InputError(f"malformed embedding JSON: {exc}") from exc


@dataclass
class DistortionCertificate:
    lip: float
    colip: float
    distortion: float
    argmax_pair: tuple[str, str] | None
    argmin_pair: tuple[str, str] | None

    def to_json(self) -> dict:
        return {
            "lip": self.lip,
            "colip": self.colip,
            "distortion": self.distortion,
            "argmax_pair": list(self.argmax_pair) if self.argmax_pair else None,
            "argmin_pair": list(self.argmin_pair) if self.argmin_pair else None,
        }


def pairwise_norms(X: np.ndarray, p: float, block: int = 256) -> np.ndarray:
    n = X.shape[0]
    out = np.zeros((n, n))
    for s in range(0, n, block):
        diff = np.abs(X[s : s + block, None, :] - X[None, :, :])
        if p == 2:
            out[s : s + block] = np.sqrt(np.sum(diff * diff, axis=2))
        elif p == 1:
            out[s : s + block] = np.sum(diff, axis=2)
        else:
            # scale by the row max before powering to avoid under/overflow
            m = diff.max(axis=2, keepdims=True)
            safe = np.where(m > 0, m, 1.0)
            out[s : s + block] = m[..., 0] * np.sum((diff / safe) ** p, axis=2) ** (1.0 / p)
    return out


def distortion(emb: PointEmbedding, metric: WeightedRootedTree | FiniteMetric) -> DistortionCertificate:
    """Exact lip / colip / distortion over all pairs of metric points."""
    if isinstance(metric, WeightedRootedTree):
        points, D = list(metric.order), metric.distance_matrix()
    else:
        points, D = list(metric.points), metric.dist
    if len(points) < 2:
        raise InputError("need at least two points")
    X = emb.dense(points)
    E = pairwise_norms(X, emb.p)
    iu = np.triu_indices(len(points), 1)
    d = D[iu]
    e = E[iu]
    if np.any(d <= 0):
        raise InputError("metric has coincident distinct points")
    r = e / d
    imax, imin = int(np.argmax(r)), int(np.argmin(r))
    lip, colip = float(r[imax]), float(r[imin])
    pair = lambda k: (points[iu[0][k]], points[iu[1][k]])
    dist = lip / colip if colip > 0 else INF
    return DistortionCertificate(lip, colip, dist, pair(imax), pair(imin))


def _color_lengths(tree: WeightedRootedTree, col: Mapping[str, int]) -> dict[str, dict[str, float]]:
    """Length each color contributes to the root path of every vertex."""
    out: dict[str, dict[str, float]] = {tree.root: {}}
    for v in tree.order[1:]:
        vec = dict(out[tree.parent[v]])
        k = f"c{col[v]}"
        vec[k] = vec.get(k, 0.0) + tree.edge_length[v]
        out[v] = vec
    return out


def simple_coloring_embedding(tree: WeightedRootedTree, col: Mapping[str, int], p: float) -> PointEmbedding:
    """f(v) = sum_k l_k(v) e_k, one coordinate per color."""
    ok, bad = check_monotone(tree, col)
    if not ok:
        raise PreconditionError(f"coloring is not monotone (color {bad})")
    return PointEmbedding(p, _color_lengths(tree, col))


def reasonable_embedding(
    tree: WeightedRootedTree, palette: Mapping[str, int], delta: float, p: float
) -> PointEmbedding:
    """Same coordinates as the simple embedding, over a (non-monotone) palette."""
    ok, pair, ratio = check_reasonable(tree, palette, delta)
    if not ok:
        raise PreconditionError(f"palette coloring is not {delta}-reasonable (pair {pair}, ratio {ratio})")
    emb = PointEmbedding(p, _color_lengths(tree, palette))
    emb.meta["palette_size"] = len(set(palette.values())) if palette else 0
    return emb


@dataclass
class MatousekData:
    """Per-vertex sequences used by the strong-coloring embedding."""

    colors: dict[str, list[int]]
    d: dict[str, list[float]]
    s: dict[str, list[float]]


def _matousek_sequences(tree: WeightedRootedTree, col: Mapping[str, int], delta: float) -> MatousekData:
    colors: dict[str, list[int]] = {tree.root: []}
    dd: dict[str, list[float]] = {tree.root: []}
    ss: dict[str, list[float]] = {}
    for v in tree.order[1:]:
        p = tree.parent[v]
        ks, ds = list(colors[p]), list(dd[p])
        k = col[v]
        if ks and ks[-1] == k:
            ds[-1] += tree.edge_length[v]
        else:
            ks.append(k)
            ds.append(tree.edge_length[v])
        colors[v], dd[v] = ks, ds
    for v in tree.order:
        ds = dd[v]
        m = len(ds)
        s = []
        for i in range(m):
            acc = 0.0
            tot = 0.0
            for j in range(i, m):
                acc += ds[j]
                tot += max(0.0, ds[j] - delta / 2 * acc)
            s.append(tot)
        ss[v] = s
    return MatousekData(colors, dd, ss)


def matousek_embedding(
    tree: WeightedRootedTree, col: Mapping[str, int], delta: float, p: float, strong_delta: float | None = None
) -> PointEmbedding:
    """Embedding driven by a delta-strong coloring.

    Coordinate k_i(v) of f(v) is d_i(v)^(1/p) s_i(v)^((p-1)/p), where d_i(v) is
    the length of the i-th color class met going down to v and
    s_i(v) = sum_{j>=i} max(0, d_j - (delta/2) sum_{h=i..j} d_h).
    For p < 2 the p = 2 coordinates are used.
    """
    ok, bad = check_monotone(tree, col)
    if not ok:
        raise PreconditionError(f"coloring is not monotone (color {bad})")
    if not 0 < delta <= 0.5:
        raise PreconditionError(f"delta must lie in (0, 1/2], got {delta}")
    if strong_delta is not None and delta > strong_delta * (1 + 1e-12):
        raise PreconditionError(f"delta {delta} exceeds the coloring's strongness {strong_delta}")
    q = max(p, 2.0)
    data = _matousek_sequences(tree, col, delta)
    coords: dict[str, dict[str, float]] = {}
    for v in tree.order:
        vec = {}
        for k, d, s in zip(data.colors[v], data.d[v], data.s[v]):
            vec[f"c{k}"] = d ** (1 / q) * s ** ((q - 1) / q)
        coords[v] = vec
    emb = PointEmbedding(q, coords, {"requested_p": p, "routed_to_p2": p < 2, "delta": delta})
    emb.meta["sequences"] = data
    return emb


def use_delta_strong_violations(emb: PointEmbedding) -> list[tuple[str, int]]:
    """Vertices/indices where s_i(v) < (1/4) sum_{j>=i} d_j(v)."""
    data: MatousekData = emb.meta["sequences"]
    bad = []
    for v, ds in data.d.items():
        s = data.s[v]
        tail = 0.0
        for i in range(len(ds) - 1, -1, -1):
            tail += ds[i]
            if s[i] < tail / 4 * (1 - 1e-12):
                bad.append((v, i))
    return bad


def matousek_bounds(delta: float, p: float) -> dict:
    q = max(p, 2.0)
    return {
        "lip": (5 * math.log(3 / delta)) ** (1 / q),
        "lip_edge": (4 * math.log(1 + 2 / delta) + 1) ** (1 / q),
        "inverse_lip": 48.0,
        "distortion": 4 * math.log(2 / delta) ** min(1 / p, 0.5),
    }


def edge_lipschitz(emb: PointEmbedding, tree: WeightedRootedTree) -> float:
    """max over tree edges of |f(u) - f(v)|_p / l(u, v)."""
    worst = 0.0
    for v in tree.order[1:]:
        u = tree.parent[v]
        a, b = emb.coords[u], emb.coords[v]
        keys = set(a) | set(b)
        diff = np.array([a.get(k, 0.0) - b.get(k, 0.0) for k in keys])
        worst = max(worst, float(np.linalg.norm(diff, ord=emb.p)) / tree.edge_length[v])
    return worst


# subdivisions and padding ------------------------------------------------------

Point = str | tuple[str, float]


def rtree_distance(tree: WeightedRootedTree, x: Point, y: Point) -> float:
    """Distance in the metric tree obtained by turning edges into intervals.

    A vertex is given by its id; an interior point by ``(child, eta)``: the
    point at distance eta * l from the parent end of the edge into ``child``.
    """
    if isinstance(x, str) and isinstance(y, str):
        return tree.distance(x, y)
    if isinstance(x, str):
        x, y = y, x
    v, eta = x
    u, l = tree.parent[v], tree.edge_length[v]
    if isinstance(y, str):
        if tree.is_ancestor(v, y):
            return tree.distance(y, v) + (1 - eta) * l
        return tree.distance(y, u) + eta * l
    v2, eta2 = y
    u2, l2 = tree.parent[v2], tree.edge_length[v2]
    if v == v2:
        return abs(eta - eta2) * l
    if tree.is_ancestor(v, u2):
        return (1 - eta) * l + tree.distance(v, u2) + eta2 * l2
    if tree.is_ancestor(v2, u):
        return (1 - eta2) * l2 + tree.distance(v2, u) + eta * l
    return eta * l + tree.distance(u, u2) + eta2 * l2


def sample_id(edge: str, eta: float) -> str:
    return f"{edge}@{eta!r}"


def extend_to_subdivision(
    tree: WeightedRootedTree,
    f: PointEmbedding,
    samples: Sequence[tuple[str, float]],
    variant: str = "tent",
) -> PointEmbedding:
    """Extend f to interior edge points ``(child, eta)``.

    The point is sent to (1 - eta) f(u) + eta f(v) + w(eta) d(u, v) beta_uv,
    where u is the parent and beta_uv a fresh direction ``beta:<child>``.
    With ``variant="printed"`` the weight is w(eta) = eta, which does not
    return to f(v) at eta = 1 and is not Lipschitz near that end. The default
    ``"tent"`` uses w(eta) = min(eta, 1 - eta), which is continuous at both
    endpoints. Sample points are named ``"<child>@<eta>"``.
    """
    if variant not in ("tent", "printed"):
        raise InputError(f"unknown variant {variant!r}")
    coords = {v: dict(c) for v, c in f.coords.items()}
    points: dict[str, tuple[str, float]] = {}
    for e, eta in samples:
        if e not in tree.parent:
            raise InputError(f"{e!r} does not name an edge")
        if not 0 <= eta <= 1:
            raise InputError(f"eta must lie in [0, 1], got {eta}")
        u = tree.parent[e]
        fu, fv = f.coords[u], f.coords[e]
        vec = {}
        for k in set(fu) | set(fv):
            vec[k] = (1 - eta) * fu.get(k, 0.0) + eta * fv.get(k, 0.0)
        b = f"beta:{e}"
        if b in vec:
            raise InputError(f"basis id {b!r} already in use")
        w = eta if variant == "printed" else min(eta, 1 - eta)
        vec[b] = w * tree.edge_length[e]
        sid = sample_id(e, eta)
        coords[sid] = vec
        points[sid] = (e, float(eta))
    return PointEmbedding(f.p, coords, {"samples": points, "variant": variant})


def subdivision_metric(
    tree: WeightedRootedTree, samples: Sequence[tuple[str, float]], include_vertices: bool = True
) -> FiniteMetric:
    """Interval-tree metric on vertices plus sample points.

    Samples that coincide with an already listed point (distance 0) are
    skipped so the result is a genuine metric.
    """
    pts: list[Point] = list(tree.order) if include_vertices else []
    names: list[str] = list(tree.order) if include_vertices else []
    for e, eta in samples:
        x = (e, float(eta))
        if any(rtree_distance(tree, x, y) <= 1e-12 * max(1.0, tree.edge_length[e]) for y in pts):
            continue
        pts.append(x)
        names.append(sample_id(e, eta))
    n = len(pts)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            D[i, j] = D[j, i] = rtree_distance(tree, pts[i], pts[j])
    return FiniteMetric(names, D, validate=False)


def pad_leaves(tree: WeightedRootedTree, pads: Mapping[str, float]) -> WeightedRootedTree:
    parent = dict(tree.parent)
    length = dict(tree.edge_length)
    for leaf, x in pads.items():
        if x > 0:
            parent[f"{leaf}+"] = leaf
            length[f"{leaf}+"] = float(x)
    return WeightedRootedTree(tree.root, parent, length)


def leaf_pad_embedding(tree: WeightedRootedTree, f: PointEmbedding, pads: Mapping[str, float]) -> PointEmbedding:
    """f(leaf+) = f(leaf) + pad * beta_leaf with a fresh direction per leaf."""
    coords = {v: dict(c) for v, c in f.coords.items()}
    for leaf, x in sorted(pads.items()):
        if x <= 0:
            continue
        if leaf not in tree or not tree.is_leaf(leaf):
            raise InputError(f"{leaf!r} is not a leaf")
        vec = dict(f.coords[leaf])
        vec[f"pad:{leaf}"] = float(x)
        coords[f"{leaf}+"] = vec
    return PointEmbedding(f.p, coords)


# report arithmetic -------------------------------------------------------------

def bounds_report(
    tree: WeightedRootedTree | None,
    c: float,
    p: float,
    measured: ColoringQuality | None = None,
    k_lower: int | None = None,
    certified: DistortionCertificate | None = None,
) -> dict:
    """Evaluate the distortion bounds at measured quantities.

    Entries are labelled ``certified`` (computed from an actual embedding or
    witness), ``formula`` (theorem expression up to unspecified constants) or
    ``heuristic``.
    """
    ex = min(1 / p, 0.5)
    if not c > 1:
        raise InputError("c must exceed 1")
    out: dict = {"c": c, "p": p}
    if tree is not None:
        out["n_vertices"] = len(tree.order)
    if k_lower is not None:
        out["k_lower"] = {"value": k_lower, "label": "certified"}
        out["upper_from_binary"] = {"value": (c / (c - 1) * k_lower) ** ex if k_lower > 0 else None, "label": "formula"}
        if k_lower >= 1:
            out["lower_from_binary"] = {"value": (1 / c) * math.log(k_lower) ** ex, "label": "formula"}
        else:
            out["lower_from_binary"] = {"value": None, "label": "no lower bound"}
    if measured is not None:
        eps = measured.goodness
        out["simple_embedding_upper"] = {"value": 2 ** (1 / p) / eps, "label": "formula"}
        delta = measured.strong_delta
        if delta:
            out["star"] = {"value": math.sqrt(1 + math.log(1 / delta)), "label": "heuristic"}
            out["strong_embedding_upper"] = {"value": 4 * math.log(2 / min(delta, 0.5)) ** ex, "label": "formula"}
            out["lp_log_delta"] = {"value": math.log(2 / delta) ** ex, "label": "heuristic"}
    if certified is not None:
        out["certified_distortion"] = {"value": certified.distortion, "label": "certified"}
    return out
