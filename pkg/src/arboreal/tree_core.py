"""Weighted rooted trees, finite metrics and the structural queries built on them.

Vertex ids are strings. Every place where an arbitrary choice is needed
(child order, leaf processing order) is resolved lexicographically so that
all results are reproducible.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

REL_TOL = 1e-9


class InputError(ValueError):
    """Malformed or inconsistent input data."""


class PreconditionError(ValueError):
    """Input is well formed but violates a documented precondition."""


class ResourceError(RuntimeError):
    """Input exceeds a documented size limit."""


class WeightedRootedTree:
    """Finite rooted tree with strictly positive edge lengths.

    ``edge_length[v]`` is the length of the edge from ``v`` to its parent.
    Instances are treated as immutable after construction.
    """

    def __init__(self, root: str, parent: dict[str, str], edge_length: dict[str, float]):
        root = str(root)
        parent = {str(c): str(p) for c, p in parent.items()}
        edge_length = {str(c): float(x) for c, x in edge_length.items()}
        if root in parent:
            raise InputError(f"root {root!r} has a parent")
        if set(parent) != set(edge_length):
            raise InputError("parent and edge_length maps must have the same keys")
        for c, x in edge_length.items():
            if not math.isfinite(x) or x <= 0:
                raise InputError(f"edge ({parent[c]!r}, {c!r}) has non-positive or non-finite length {x}")
        vertices = {root} | set(parent)
        for p in parent.values():
            if p not in vertices:
                raise InputError(f"parent {p!r} is not a vertex")
        children: dict[str, list[str]] = {v: [] for v in vertices}
        for c, p in parent.items():
            children[p].append(c)
        for v in children:
            children[v].sort()
        # BFS from the root doubles as the cycle / connectivity check
        order = [root]
        depth = {root: 0.0}
        level = {root: 0}
        i = 0
        while i < len(order):
            v = order[i]
            i += 1
            for c in children[v]:
                depth[c] = depth[v] + edge_length[c]
                level[c] = level[v] + 1
                order.append(c)
        if len(order) != len(vertices):
            raise InputError("parent map contains a cycle or a vertex unreachable from the root")
        self.root = root
        self.parent = parent
        self.edge_length = edge_length
        self.children = {v: tuple(cs) for v, cs in children.items()}
        self.depth = depth
        self.level = level
        self.order = tuple(order)
        self._index: dict[str, int] | None = None
        self._matrix: np.ndarray | None = None

    # construction helpers
    @classmethod
    def from_edges(cls, root: str, edges: Iterable[Sequence]) -> "WeightedRootedTree":
        parent: dict[str, str] = {}
        length: dict[str, float] = {}
        for p, c, x in edges:
            c = str(c)
            if c in parent:
                raise InputError(f"vertex {c!r} has two parents")
            parent[c] = str(p)
            length[c] = float(x)
        return cls(root, parent, length)

    @classmethod
    def from_json(cls, data: dict) -> "WeightedRootedTree":
        if not isinstance(data, dict) or "root" not in data or "edges" not in data:
            raise InputError("tree JSON needs 'root' and 'edges'")
        return cls.from_edges(data["root"], data["edges"])

    def to_json(self) -> dict:
        edges = sorted([self.parent[c], c, self.edge_length[c]] for c in self.parent)
        return {"root": self.root, "edges": edges}

    def edges(self) -> list[tuple[str, str, float]]:
        return sorted((self.parent[c], c, self.edge_length[c]) for c in self.parent)

    # basic structure
    @property
    def vertices(self) -> tuple[str, ...]:
        return self.order

    def __len__(self) -> int:
        return len(self.order)

    def __contains__(self, v: object) -> bool:
        return v in self.depth

    def leaves(self) -> list[str]:
        return sorted(v for v in self.order if not self.children[v])

    def is_leaf(self, v: str) -> bool:
        return not self.children[v]

    def height(self) -> float:
        return max(self.depth.values())

    def min_edge(self) -> float:
        return min(self.edge_length.values()) if self.edge_length else 0.0

    def _check(self, *vs: str) -> None:
        for v in vs:
            if v not in self.depth:
                raise InputError(f"unknown vertex {v!r}")

    def ancestors(self, v: str) -> list[str]:
        """Vertices of the path from ``v`` up to the root, ``v`` first."""
        self._check(v)
        out = [v]
        while v != self.root:
            v = self.parent[v]
            out.append(v)
        return out

    def root_path(self, v: str) -> list[str]:
        """Vertices from the root down to ``v``."""
        return self.ancestors(v)[::-1]

    def is_ancestor(self, a: str, v: str) -> bool:
        """True when ``a`` lies on the root path of ``v`` (including ``a == v``)."""
        self._check(a, v)
        while self.level[v] > self.level[a]:
            v = self.parent[v]
        return v == a

    def lca(self, u: str, v: str) -> str:
        self._check(u, v)
        while self.level[u] > self.level[v]:
            u = self.parent[u]
        while self.level[v] > self.level[u]:
            v = self.parent[v]
        while u != v:
            u, v = self.parent[u], self.parent[v]
        return u

    def distance(self, u: str, v: str) -> float:
        w = self.lca(u, v)
        return (self.depth[u] - self.depth[w]) + (self.depth[v] - self.depth[w])

    def path(self, u: str, v: str) -> list[str]:
        w = self.lca(u, v)
        up = []
        x = u
        while x != w:
            up.append(x)
            x = self.parent[x]
        down = []
        x = v
        while x != w:
            down.append(x)
            x = self.parent[x]
        return up + [w] + down[::-1]

    def path_edges(self, u: str, v: str) -> list[str]:
        """Edges of P(u, v), each named by its lower (child) endpoint."""
        w = self.lca(u, v)
        out = []
        for x in (u, v):
            while x != w:
                out.append(x)
                x = self.parent[x]
        return out

    def subtree(self, v: str) -> list[str]:
        """Vertices of the subtree rooted at ``v`` in BFS order."""
        self._check(v)
        out = [v]
        i = 0
        while i < len(out):
            out.extend(self.children[out[i]])
            i += 1
        return out

    def descendant_leaves(self, v: str) -> list[str]:
        return sorted(x for x in self.subtree(v) if not self.children[x])

    def induced(self, keep: Iterable[str]) -> "WeightedRootedTree":
        """Tree spanned by an ancestor-closed set containing the root."""
        keep = set(keep)
        if self.root not in keep:
            raise InputError("induced subtree must contain the root")
        for v in keep:
            if v != self.root and self.parent[v] not in keep:
                raise InputError(f"vertex {v!r} kept without its parent")
        return WeightedRootedTree(
            self.root,
            {v: self.parent[v] for v in keep if v != self.root},
            {v: self.edge_length[v] for v in keep if v != self.root},
        )

    def rooted_at(self, v: str) -> "WeightedRootedTree":
        """The subtree T_v as a tree of its own."""
        sub = self.subtree(v)
        return WeightedRootedTree(
            v,
            {x: self.parent[x] for x in sub if x != v},
            {x: self.edge_length[x] for x in sub if x != v},
        )

    # metric views
    def index(self) -> dict[str, int]:
        if self._index is None:
            self._index = {v: i for i, v in enumerate(self.order)}
        return self._index

    def distance_matrix(self) -> np.ndarray:
        """All-pairs distances indexed by :attr:`order` (BFS order)."""
        if self._matrix is None:
            n = len(self.order)
            idx = self.index()
            D = np.zeros((n, n))
            # each BFS step derives a new row from the parent's row
            for v in self.order[1:]:
                i, pi = idx[v], idx[self.parent[v]]
                row = D[pi] + self.edge_length[v]
                for x in self.subtree(v):
                    row[idx[x]] -= 2 * self.edge_length[v]
                row[i] = 0.0
                D[i] = row
                D[:, i] = row
            self._matrix = D
        return self._matrix

    def metric(self) -> "FiniteMetric":
        return FiniteMetric(list(self.order), self.distance_matrix(), validate=False)

    def __repr__(self) -> str:
        return f"WeightedRootedTree(root={self.root!r}, n={len(self)})"


@dataclass(frozen=True)
class QueryResult:
    lca: str
    distance: float
    path: list[str] = field(default_factory=list)


def query(tree: WeightedRootedTree, u: str, v: str) -> QueryResult:
    """Least common ancestor, distance and the vertex path between ``u`` and ``v``."""
    w = tree.lca(u, v)
    return QueryResult(lca=w, distance=tree.distance(u, v), path=tree.path(u, v))


class FiniteMetric:
    """Finite metric space on an ordered list of point ids."""

    def __init__(self, points: Sequence, dist, validate: bool = True):
        self.points = [str(p) for p in points]
        self.dist = np.asarray(dist, dtype=float)
        n = len(self.points)
        if self.dist.shape != (n, n):
            raise InputError(f"distance matrix has shape {self.dist.shape}, expected {(n, n)}")
        if len(set(self.points)) != n:
            raise InputError("duplicate point ids")
        if validate:
            self.validate()

    def validate(self) -> None:
        D = self.dist
        if not np.all(np.isfinite(D)):
            raise InputError("distance matrix has non-finite entries")
        scale = max(1.0, float(D.max(initial=0.0)))
        tol = REL_TOL * scale
        if np.any(D < -tol):
            raise InputError("negative distance")
        if np.any(np.abs(np.diag(D)) > tol):
            raise InputError("non-zero diagonal")
        if not np.allclose(D, D.T, rtol=0, atol=tol):
            raise InputError("distance matrix is not symmetric")
        for k in range(len(self.points)):
            # D[i,j] <= D[i,k] + D[k,j] for all i, j
            viol = D - (D[:, k][:, None] + D[k, :][None, :])
            if viol.max(initial=0.0) > tol:
                i, j = np.unravel_index(int(np.argmax(viol)), viol.shape)
                raise InputError(
                    f"triangle inequality fails for ({self.points[i]}, {self.points[k]}, {self.points[j]})"
                )

    def __len__(self) -> int:
        return len(self.points)

    def d(self, a: str, b: str) -> float:
        idx = {p: i for i, p in enumerate(self.points)}
        return float(self.dist[idx[a], idx[b]])

    @classmethod
    def from_json(cls, data: dict) -> "FiniteMetric":
        if not isinstance(data, dict) or "points" not in data or "dist" not in data:
            raise InputError("metric JSON needs 'points' and 'dist'")
        return cls(data["points"], data["dist"])

    def to_json(self) -> dict:
        return {"points": list(self.points), "dist": self.dist.tolist()}


@dataclass(frozen=True)
class FourPointResult:
    is_tree_metric: bool
    witness: tuple[str, str, str, str] | None = None


def four_point_check(metric: FiniteMetric, tol: float = REL_TOL) -> FourPointResult:
    """Check the four point condition over every quadruple of points."""
    D = metric.dist
    n = len(metric)
    eps = tol * max(1.0, float(D.max(initial=0.0)))
    for a, b, c, e in itertools.combinations(range(n), 4):
        s = sorted((D[a, b] + D[c, e], D[a, c] + D[b, e], D[a, e] + D[b, c]))
        if s[2] - s[1] > eps:
            pts = metric.points
            return FourPointResult(False, (pts[a], pts[b], pts[c], pts[e]))
    return FourPointResult(True, None)


def upward_r_net(tree: WeightedRootedTree, R: float) -> set[str]:
    """Upward R-net: separated along root paths, covering every vertex from above.

    Implements the leaf-peeling induction: the net of the tree with a leaf
    ``v`` removed is extended by ``v`` iff the nearest net point on the root
    path of its parent is at distance at least R from ``v``. Unrolling the
    recursion, the decision for each vertex depends only on its ancestors, so
    the vertices are decided top-down (leaves in lexicographic order give the
    same result).
    """
    if not R > 0:
        raise InputError("R must be positive")
    net: set[str] = {tree.root}
    nearest: dict[str, str] = {tree.root: tree.root}
    for v in tree.order[1:]:
        x = nearest[tree.parent[v]]
        if tree.depth[v] - tree.depth[x] >= R:
            net.add(v)
            nearest[v] = v
        else:
            nearest[v] = x
    return net


def validate_upward_net(tree: WeightedRootedTree, net: Iterable[str], R: float) -> bool:
    """Independent exhaustive check of both upward net conditions."""
    net = set(net)
    for v in tree.vertices:
        anc = tree.ancestors(v)
        if not any(x in net and tree.depth[v] - tree.depth[x] < R for x in anc):
            return False
        if v in net:
            for x in anc[1:]:
                if x in net and tree.depth[v] - tree.depth[x] < R:
                    return False
    return True


def _multiple(x: float, resolution: float) -> int | None:
    k = round(x / resolution)
    if k >= 1 and abs(k * resolution - x) <= REL_TOL * max(abs(x), resolution):
        return int(k)
    return None


def unit_subdivide(tree: WeightedRootedTree, resolution: float = 1.0) -> WeightedRootedTree:
    """Replace each edge of length k*resolution by k edges of length ``resolution``.

    Synthetic vertices are named ``"<child>~<i>"`` for i = 1..k-1 counted from
    the child end upward.
    """
    if not resolution > 0:
        raise InputError("resolution must be positive")
    parent: dict[str, str] = {}
    length: dict[str, float] = {}
    for p, c, x in tree.edges():
        k = _multiple(x, resolution)
        if k is None:
            raise PreconditionError(f"edge ({p!r}, {c!r}) length {x} is not a multiple of {resolution}")
        lower = c
        for i in range(1, k):
            s = f"{c}~{i}"
            if s in tree:
                raise InputError(f"synthetic id {s!r} collides with an existing vertex")
            parent[lower] = s
            length[lower] = resolution
            lower = s
        parent[lower] = p
        length[lower] = resolution
    return WeightedRootedTree(tree.root, parent, length)


@dataclass(frozen=True)
class NormalizedTree:
    tree: WeightedRootedTree
    height: int
    leaf_pad: dict[str, int]


def normalize_height(tree: WeightedRootedTree) -> NormalizedTree:
    """Pad every leaf to depth 2^m and subdivide into unit edges.

    Requires integral edge lengths. Pendant leaves are named ``"<leaf>+"``.
    """
    if len(tree) == 0:
        raise InputError("empty tree")
    depth_int: dict[str, int] = {}
    for v in tree.vertices:
        k = round(tree.depth[v])
        if abs(k - tree.depth[v]) > REL_TOL * max(1.0, tree.depth[v]):
            raise PreconditionError(f"vertex {v!r} has non-integral depth {tree.depth[v]}")
        depth_int[v] = k
    hmax = max(depth_int[l] for l in tree.leaves())
    m = 0 if hmax <= 1 else math.ceil(math.log2(hmax))
    while 2**m < hmax:
        m += 1
    H = 2**m
    parent = dict(tree.parent)
    length = {c: float(round(x)) for c, x in tree.edge_length.items()}
    pad: dict[str, int] = {}
    for l in tree.leaves():
        extra = H - depth_int[l]
        pad[l] = extra
        if extra > 0:
            t = f"{l}+"
            if t in tree:
                raise InputError(f"pendant id {t!r} collides with an existing vertex")
            parent[t] = l
            length[t] = float(extra)
    padded = WeightedRootedTree(tree.root, parent, length)
    return NormalizedTree(unit_subdivide(padded, 1.0), H, pad)


@dataclass(frozen=True)
class DoublingResult:
    value: int
    certified: bool
    lower: int
    upper: int

    def __int__(self) -> int:
        return self.value


def _bitmask(idx) -> int:
    m = 0
    for j in idx:
        m |= 1 << int(j)
    return m


def _greedy_cover(mask_rows: list[int], target: int) -> int:
    left = target
    count = 0
    while left:
        best = max(mask_rows, key=lambda m: bin(m & left).count("1"))
        if not best & left:
            raise AssertionError("greedy cover stalled")
        left &= ~best
        count += 1
    return count


def _exact_cover(mask_rows: list[int], target: int, limit: int) -> int:
    """Smallest number of masks covering ``target``; returns ``limit`` if none smaller."""
    rows = sorted({m & target for m in mask_rows if m & target}, key=lambda m: -bin(m).count("1"))
    best = limit

    def rec(left: int, used: int) -> None:
        nonlocal best
        if not left:
            best = min(best, used)
            return
        if used + 1 >= best:
            return
        low = left & -left
        for m in rows:
            if m & low:
                rec(left & ~m, used + 1)

    rec(target, 0)
    return best


def doubling_constant(metric: FiniteMetric, exact_limit: int = 12) -> DoublingResult:
    """Doubling constant over all balls with radius equal to a pairwise distance.

    Covering balls have radius r/2 and may be centered anywhere in the space.
    Balls with at most ``exact_limit`` points are covered exactly; larger ones
    use greedy set cover, in which case the result is an upper bound.
    """
    n = len(metric)
    if n > 2000:
        raise ResourceError(f"doubling_constant supports at most 2000 points, got {n}")
    if n == 1:
        return DoublingResult(1, True, 1, 1)
    D = metric.dist
    eps = REL_TOL * max(1.0, float(D.max()))
    radii = sorted({float(x) for x in np.unique(D) if x > 0})
    lower = 1
    upper = 1
    certified = True
    for r in radii:
        half = (D <= r / 2 + eps)
        masks = [_bitmask(np.nonzero(half[i])[0]) for i in range(n)]
        for x in range(n):
            ball = np.nonzero(D[x] <= r + eps)[0]
            target = _bitmask(ball)
            g = _greedy_cover(masks, target)
            if len(ball) <= exact_limit:
                e = _exact_cover(masks, target, g)
                lower = max(lower, e)
                upper = max(upper, e)
            else:
                upper = max(upper, g)
                certified = False
                lower = max(lower, 1)
    return DoublingResult(upper, certified and lower == upper, lower, upper)


def iter_pairs(vs: Sequence[str]) -> Iterator[tuple[str, str]]:
    return itertools.combinations(vs, 2)


def load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)
