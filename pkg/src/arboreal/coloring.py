"""Edge colorings of rooted trees and the scaled binary subtree search.

A coloring maps each non-root vertex (naming the edge to its parent) to an
integer color. Monotone colorings have every color class contained in a
single root-leaf path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from .generators import SSTProfile
from .tree_core import InputError, PreconditionError, WeightedRootedTree

Coloring = dict[str, int]
TOL = 1e-12
INF = math.inf


def _edges_check(tree: WeightedRootedTree, col: Mapping[str, int]) -> None:
    for c in tree.parent:
        if c not in col:
            raise InputError(f"edge ({tree.parent[c]!r}, {c!r}) is uncolored")


def color_classes(tree: WeightedRootedTree, col: Mapping[str, int]) -> dict[int, list[str]]:
    """Edges of each color, sorted top-down (by depth, then id)."""
    _edges_check(tree, col)
    out: dict[int, list[str]] = {}
    for c in tree.parent:
        out.setdefault(int(col[c]), []).append(c)
    for k in out:
        out[k].sort(key=lambda x: (tree.level[x], x))
    return out


def check_monotone(tree: WeightedRootedTree, col: Mapping[str, int]) -> tuple[bool, int | None]:
    """Return (True, None) or (False, first violating color)."""
    for k, es in sorted(color_classes(tree, col).items()):
        for a, b in zip(es, es[1:]):
            if tree.parent[b] != a:
                return False, k
    return True, None


def singleton_coloring(tree: WeightedRootedTree) -> Coloring:
    """Every edge its own color (in BFS order)."""
    return {v: i for i, v in enumerate(tree.order[1:])}


def monochromatic_path_coloring(tree: WeightedRootedTree) -> Coloring:
    """Heavy-path style coloring: the smallest child continues its parent's color."""
    col: Coloring = {}
    nxt = 0
    for v in tree.order:
        for i, c in enumerate(tree.children[v]):
            if i == 0 and v != tree.root:
                col[c] = col[v]
            else:
                col[c] = nxt
                nxt += 1
    return col


# pair scans ---------------------------------------------------------------

def _adjacency(tree: WeightedRootedTree) -> dict[str, list[str]]:
    """Neighbors of each vertex, each given as the child endpoint of the connecting edge."""
    adj: dict[str, list[str]] = {v: list(tree.children[v]) for v in tree.order}
    for c, p in tree.parent.items():
        adj[c].append(c)
    return adj


def _other(tree: WeightedRootedTree, x: str, e: str) -> str:
    return tree.parent[e] if e == x else e


def _scan_pairs(tree: WeightedRootedTree, col: Mapping[str, int], visit: Callable) -> None:
    """Call ``visit(u, v, d, lengths)`` for every pair u < v.

    ``lengths`` maps each color to the length it contributes to P(u, v). It is
    mutated as the scan proceeds, so callers must copy anything they keep.
    """
    adj = _adjacency(tree)
    L = tree.edge_length
    for u in sorted(tree.order):
        lengths: dict[int, float] = {}
        # frame: (vertex, arriving edge, distance, color touched, its old value, neighbor iterator)
        path_ptr: list[tuple] = [(u, None, 0.0, None, None, iter(adj[u]))]
        while path_ptr:
            x, via, d, k, old, it = path_ptr[-1]
            advanced = False
            for e in it:
                if e == via:
                    continue
                y = _other(tree, x, e)
                kk = col[e]
                oo = lengths.get(kk)
                lengths[kk] = (oo or 0.0) + L[e]
                dy = d + L[e]
                if y > u:
                    visit(u, y, dy, lengths)
                path_ptr.append((y, e, dy, kk, oo, iter(adj[y])))
                advanced = True
                break
            if not advanced:
                path_ptr.pop()
                if k is not None:
                    if old is None:
                        del lengths[k]
                    else:
                        lengths[k] = old


@dataclass
class ColoringQuality:
    goodness: float
    strong_delta: float | None
    worst_pair_good: tuple[str, str] | None
    worst_pair_strong: tuple[str, str] | None

    def report(self) -> dict:
        out = {
            "goodness": self.goodness,
            "strong_delta": self.strong_delta,
            "worst_pair_good": list(self.worst_pair_good) if self.worst_pair_good else None,
            "worst_pair_strong": list(self.worst_pair_strong) if self.worst_pair_strong else None,
        }
        if self.strong_delta:
            out["euclidean_distortion_estimate"] = math.sqrt(1 + math.log(1 / self.strong_delta))
        return out


def strong_threshold(values: Iterable[float], d: float) -> float:
    """Largest class length l such that classes of length >= l cover half of d."""
    vals = sorted(values, reverse=True)
    acc = 0.0
    half = d / 2 * (1 - TOL)
    for x in vals:
        acc += x
        if acc >= half:
            return x
    return 0.0


def quality(tree: WeightedRootedTree, col: Mapping[str, int], strong: bool = True) -> ColoringQuality:
    """Exact goodness and strongness of a monotone coloring over all vertex pairs."""
    ok, bad = check_monotone(tree, col)
    if not ok:
        raise PreconditionError(f"coloring is not monotone (color {bad})")
    state = {"g": INF, "gp": None, "s": INF, "sp": None}

    def visit(u, v, d, lengths):
        g = max(lengths.values()) / d
        if g < state["g"]:
            state["g"], state["gp"] = g, (u, v)
        if strong:
            s = strong_threshold(lengths.values(), d) / d
            if s < state["s"]:
                state["s"], state["sp"] = s, (u, v)

    _scan_pairs(tree, col, visit)
    if state["gp"] is None:
        return ColoringQuality(1.0, 1.0 if strong else None, None, None)
    return ColoringQuality(
        min(1.0, state["g"]),
        min(1.0, state["s"]) if strong else None,
        state["gp"],
        state["sp"] if strong else None,
    )


def eps_delta_strong_check(
    tree: WeightedRootedTree, col: Mapping[str, int], eps: float, delta: float
) -> tuple[bool, tuple[str, str] | None, float]:
    """Check that classes of length >= delta*d cover at least eps*d of every path.

    Returns (flag, worst pair, worst covered fraction).
    """
    if not (0 < delta <= eps <= 1):
        raise InputError(f"need 0 < delta <= eps <= 1, got eps={eps}, delta={delta}")
    ok, bad = check_monotone(tree, col)
    if not ok:
        raise PreconditionError(f"coloring is not monotone (color {bad})")
    state = {"f": INF, "p": None}

    def visit(u, v, d, lengths):
        thr = delta * d * (1 - TOL)
        cov = sum(x for x in lengths.values() if x >= thr) / d
        if cov < state["f"]:
            state["f"], state["p"] = cov, (u, v)

    _scan_pairs(tree, col, visit)
    if state["p"] is None:
        return True, None, 1.0
    return state["f"] >= eps * (1 - TOL), state["p"], state["f"]


def relation_delta(goodness: float) -> float:
    """Strongness guaranteed for an eps-good coloring: 2^(-3/eps)."""
    return 2.0 ** (-3.0 / goodness)


# scaled binary subtrees ------------------------------------------------------

@dataclass
class WindowDP:
    """Bottom-up table for one edge window [L, U].

    ``d[v]`` is the depth of the largest path-image binary tree rooted at v;
    ``best[v][c]`` is (value, vertex) for the best witness root below child c
    at distance within the window from v.
    """

    L: float
    U: float
    d: dict
    best: dict


def _in_window(x: float, L: float, U: float) -> bool:
    return L * (1 - TOL) <= x <= U * (1 + TOL)


def window_dp(tree: WeightedRootedTree, L: float, U: float) -> WindowDP:
    if L > U:
        raise InputError(f"empty window [{L}, {U}]")
    depth = tree.depth
    d: dict[str, int] = {}
    best: dict[str, dict[str, tuple[int, str]]] = {}
    hi = U * (1 + TOL)
    for v in reversed(tree.order):
        bv: dict[str, tuple[int, str]] = {}
        base = depth[v]
        for c in tree.children[v]:
            top: tuple[int, str] | None = None
            stack = [c]
            while stack:
                x = stack.pop()
                dist = depth[x] - base
                if dist > hi:
                    continue
                if _in_window(dist, L, U):
                    val = d[x]
                    if top is None or val > top[0] or (val == top[0] and x < top[1]):
                        top = (val, x)
                stack.extend(tree.children[x])
            if top is not None:
                bv[c] = top
        best[v] = bv
        vals = sorted((t[0] for t in bv.values()), reverse=True)
        d[v] = 1 + vals[1] if len(vals) >= 2 else 0
    return WindowDP(L, U, d, best)


def _sst_window_dp(prof: SSTProfile, L: float, U: float) -> list[int]:
    """Per-depth values of the same DP on a spherically symmetric tree."""
    h = prof.height
    e = prof.edge_len
    d = [0] * (h + 1)
    for t in range(h - 1, -1, -1):
        top = -1
        for s in range(t + 1, h + 1):
            if _in_window((s - t) * e, L, U):
                top = max(top, d[s])
            elif (s - t) * e > U * (1 + TOL):
                break
        d[t] = 1 + top if prof.seq[t] >= 2 and top >= 0 else 0
    return d


@dataclass
class ScaledBinaryWitness:
    k: int
    node_map: dict[str, str] | None
    edge_window: tuple[float, float]
    root: str | None = None
    incoming: tuple[str, str] | None = None


def _top_two(bv: dict[str, tuple[int, str]]) -> list[tuple[int, str, str]]:
    items = sorted(((t[0], c, t[1]) for c, t in bv.items()), key=lambda z: (-z[0], z[1]))
    return items[:2]


def _build_node_map(dp: WindowDP, root: str, k: int) -> dict[str, str]:
    nm = {"": root}
    frontier = [("", root, k)]
    while frontier:
        label, x, r = frontier.pop()
        if r == 0:
            continue
        (_, _, w1), (_, _, w2) = _top_two(dp.best[x])
        nm[label + "0"] = w1
        nm[label + "1"] = w2
        frontier.append((label + "0", w1, r - 1))
        frontier.append((label + "1", w2, r - 1))
    return nm


def scaled_binary_subtree(
    tree: WeightedRootedTree | SSTProfile,
    L: float,
    U: float,
    root_constraint: tuple[str, str] | None = None,
    dp: WindowDP | None = None,
) -> ScaledBinaryWitness:
    """Largest path-image copy of B_k whose edges map to descending paths of length in [L, U].

    With ``root_constraint=(v, z)`` the copy must hang below the edge (v, z)
    with its root at distance in [L, U] from v (B_k plus an incoming edge);
    k is -1 when no such copy exists.
    """
    if L > U:
        raise InputError(f"empty window [{L}, {U}]")
    if isinstance(tree, SSTProfile):
        if root_constraint is not None:
            raise InputError("root_constraint is not supported for SST profiles")
        vals = _sst_window_dp(tree, L, U)
        return ScaledBinaryWitness(max(vals), None, (L, U), None)
    dp = dp or window_dp(tree, L, U)
    if root_constraint is not None:
        v, z = root_constraint
        if tree.parent.get(z) != v:
            raise InputError(f"({v!r}, {z!r}) is not an edge")
        top = dp.best[v].get(z)
        if top is None:
            return ScaledBinaryWitness(-1, None, (L, U), None, (v, z))
        k, r = top
        nm = _build_node_map(dp, r, k)
        nm["m"] = v
        return ScaledBinaryWitness(k, nm, (L, U), r, (v, z))
    k = max(dp.d.values())
    root = min(v for v in tree.order if dp.d[v] == k)
    return ScaledBinaryWitness(k, _build_node_map(dp, root, k), (L, U), root)


def _bk_distance(a: str, b: str) -> int:
    if a == "m" or b == "m":
        other = b if a == "m" else a
        return 0 if other == "m" else len(other) + 1
    i = 0
    while i < min(len(a), len(b)) and a[i] == b[i]:
        i += 1
    return len(a) + len(b) - 2 * i


def witness_distortion(tree: WeightedRootedTree, w: ScaledBinaryWitness) -> tuple[float, float, float]:
    """(lip, colip, distortion) of the witness map from B_k (unit edges) into the tree.

    lip is the max of image/source distance, colip the min; distortion their ratio.
    """
    if not w.node_map or len(w.node_map) < 2:
        return 1.0, 1.0, 1.0
    labels = sorted(w.node_map)
    idx = tree.index()
    D = tree.distance_matrix()
    ii = np.array([idx[w.node_map[s]] for s in labels])
    img = D[np.ix_(ii, ii)]
    src = np.array([[_bk_distance(a, b) for b in labels] for a in labels], dtype=float)
    mask = ~np.eye(len(labels), dtype=bool)
    ratio = img[mask] / src[mask]
    lip, colip = float(ratio.max()), float(ratio.min())
    return lip, colip, (lip / colip if colip > 0 else INF)


def tree_diameter(tree: WeightedRootedTree | SSTProfile) -> float:
    if isinstance(tree, SSTProfile):
        return tree.edge_len * tree.height * (2 if tree.seq[0] >= 2 else 1) if tree.height else 0.0
    if len(tree) == 1:
        return 0.0
    far = max(tree.order, key=lambda v: tree.depth[v])
    return max(tree.distance(far, v) for v in tree.order)


@dataclass
class BinaryProfile:
    k_lower: int
    best_scale: float | None
    witness: ScaledBinaryWitness | None
    witness_distortion: float | None = None
    table: list = field(default_factory=list)


def binary_profile(tree: WeightedRootedTree | SSTProfile, c: float) -> BinaryProfile:
    """Certified lower bound on the depth of binary trees embedding with distortion < c."""
    if not c > 1:
        raise InputError("c must exceed 1")
    if isinstance(tree, SSTProfile):
        base = tree.edge_len
    else:
        if len(tree) == 1:
            return BinaryProfile(0, None, None, None)
        base = tree.min_edge()
    diam = tree_diameter(tree)
    step = math.sqrt(c)
    best: BinaryProfile = BinaryProfile(0, None, None, None)
    t = 0
    while True:
        L = base * step**t
        if L > diam * (1 + TOL):
            break
        U = c * L * (1 - 1e-9)
        w = scaled_binary_subtree(tree, L, U)
        best.table.append((L, w.k))
        if w.k > best.k_lower:
            dist = None
            if w.node_map is not None:
                dist = witness_distortion(tree, w)[2]
                if not dist < c:
                    raise AssertionError(f"witness at scale {L} has distortion {dist} >= {c}")
            best.k_lower, best.best_scale, best.witness, best.witness_distortion = w.k, L, w, dist
        t += 1
    return best


# scale selector coloring ------------------------------------------------------

def floor_log4(x: float) -> int:
    j = math.floor(math.log(x, 4))
    while 4.0 ** (j + 1) <= x:
        j += 1
    while 4.0**j > x:
        j -= 1
    return j


def scale_bounds(tree: WeightedRootedTree) -> tuple[int, int]:
    if len(tree) == 1:
        return 0, 0
    jmin = floor_log4(tree.min_edge())
    jmax = math.ceil(math.log(max(tree_diameter(tree), 1e-300), 4)) + 1
    return jmin, max(jmin, jmax)


def scale_window(j: int, c: float) -> tuple[float, float]:
    return 9 * 4.0**j / (c - 1), 9 * c * 4.0**j / (c - 1)


@dataclass
class ScaleColoring:
    coloring: Coloring
    g: dict[str, float]
    mu: dict[str, dict[str, int]] = field(default_factory=dict)
    breakpoints: dict[str, list[str]] = field(default_factory=dict)


def breakpoint_rule(tree: WeightedRootedTree, v: str, bps: Iterable[str], g: Mapping[str, float]) -> float:
    """max{j : for all breakpoints u, d(u, v) >= 4^min(g(u), j)}, unclamped."""
    out = INF
    for u in bps:
        dd = tree.depth[v] - tree.depth[u]
        gu = g[u]
        if gu == INF or dd < 4.0**gu:
            out = min(out, floor_log4(dd))
    return out


def construct_scale_coloring(tree: WeightedRootedTree, c: float) -> ScaleColoring:
    """Breadth-first coloring driven by the scale selector g.

    At each vertex v the child admitting the largest binary copy at scale
    g(v) continues the incoming color; the remaining children get fresh
    colors. Ties go to the lexicographically smallest child.
    """
    if not c > 1:
        raise InputError("c must exceed 1")
    jmin, jmax = scale_bounds(tree)
    dps: dict[int, WindowDP] = {}

    def dp_at(j: int) -> WindowDP:
        if j not in dps:
            dps[j] = window_dp(tree, *scale_window(j, c))
        return dps[j]

    col: Coloring = {}
    g: dict[str, float] = {tree.root: INF}
    bps: dict[str, list[str]] = {tree.root: []}
    mu: dict[str, dict[str, int]] = {}
    nxt = 0
    for v in tree.order:
        if v != tree.root:
            p = tree.parent[v]
            bps[v] = bps[p] + ([p] if p == tree.root or col[v] != col[p] else [])
            j = breakpoint_rule(tree, v, bps[v], g)
            g[v] = min(max(j, jmin), jmax)
        kids = tree.children[v]
        if not kids:
            continue
        j = jmax if g[v] == INF else int(g[v])
        dp = dp_at(j)
        m = {z: dp.best[v][z][0] if z in dp.best[v] else -1 for z in kids}
        mu[v] = m
        top = max(m.values())
        w = min(z for z in kids if m[z] == top)
        for z in kids:
            if z == w and v != tree.root:
                col[z] = col[v]
            else:
                col[z] = nxt
                nxt += 1
    return ScaleColoring(col, g, mu, bps)


def recompute_g(tree: WeightedRootedTree, col: Mapping[str, int], c: float) -> dict[str, float]:
    """Independent pointwise recomputation of g from a finished coloring."""
    jmin, jmax = scale_bounds(tree)
    g: dict[str, float] = {tree.root: INF}
    for v in tree.order[1:]:
        path = tree.root_path(v)
        bp = [tree.root] + [x for a, x, b in zip(path, path[1:], path[2:]) if col[x] != col[b]]
        feasible = []
        for j in range(jmin - 1, jmax + 2):
            if all(tree.distance(u, v) >= 4.0 ** min(g[u], j) for u in bp):
                feasible.append(j)
        j = max(feasible) if feasible else jmin
        g[v] = min(max(j, jmin), jmax)
    return g


def root_leaf_breakpoints(tree: WeightedRootedTree, col: Mapping[str, int], leaf: str) -> list[str]:
    path = tree.root_path(leaf)
    return [tree.root] + [x for x, nx in zip(path[1:-1], path[2:]) if col[nx] != col[x]]


def _longest_chain(pos: list[float], A: float, B: float) -> int:
    n = len(pos)
    if n == 0:
        return 0
    best = [1] * n
    for i in range(n):
        for k in range(i):
            gap = pos[i] - pos[k]
            if A * (1 - TOL) <= gap <= B * (1 + TOL):
                best[i] = max(best[i], best[k] + 1)
    return max(best)


def check_claim_g(tree: WeightedRootedTree, sc: ScaleColoring, c: float) -> list[dict]:
    """Validate the breakpoint subsequence property on every root-leaf path.

    For every run of consecutive breakpoints with gaps <= 4^j and span at
    least 30c/(c-1) 4^j, look for breakpoints with g = j whose consecutive
    gaps lie in [9/(c-1) 4^j, 9c/(c-1) 4^j] and whose number is at least
    (c-1)/(20c 4^j) times the span. Returns the failures (empty when valid).
    """
    jmin, jmax = scale_bounds(tree)
    fails: list[dict] = []
    seen: set = set()
    for leaf in tree.leaves():
        bp = root_leaf_breakpoints(tree, sc.coloring, leaf)
        pos = [tree.depth[b] for b in bp]
        for j in range(jmin, jmax + 1):
            q = 4.0**j
            A, B = scale_window(j, c)
            need_span = 30 * c / (c - 1) * q
            for i1 in range(len(bp)):
                for i2 in range(i1 + 1, len(bp)):
                    if pos[i2] - pos[i2 - 1] > q * (1 + TOL):
                        break
                    span = pos[i2] - pos[i1]
                    if span < need_span:
                        continue
                    key = (bp[i1], bp[i2], j)
                    if key in seen:
                        continue
                    seen.add(key)
                    cand = [pos[i] for i in range(i1, i2 + 1) if sc.g[bp[i]] == j]
                    got = _longest_chain(cand, A, B)
                    need = (c - 1) / (20 * c * q) * span
                    if got < need * (1 - TOL):
                        fails.append({"from": bp[i1], "to": bp[i2], "j": j, "count": got, "need": need})
    return fails


# doubling pipeline ------------------------------------------------------------

def is_regular(tree: WeightedRootedTree, col: Mapping[str, int]) -> bool:
    for es in color_classes(tree, col).values():
        acc = 0.0
        for a, b in zip(es, es[1:]):
            acc += tree.edge_length[a]
            if tree.edge_length[b] > 2 * acc * (1 + TOL):
                return False
    return True


def regularize_coloring(tree: WeightedRootedTree, col: Mapping[str, int]) -> Coloring:
    """Split color classes until every edge is at most twice the class length above it."""
    ok, bad = check_monotone(tree, col)
    if not ok:
        raise PreconditionError(f"coloring is not monotone (color {bad})")
    out = {k: int(v) for k, v in col.items()}
    nxt = max(out.values(), default=-1) + 1
    work = list(color_classes(tree, out).values())
    while work:
        es = work.pop()
        acc = 0.0
        for i in range(len(es) - 1):
            acc += tree.edge_length[es[i]]
            if tree.edge_length[es[i + 1]] > 2 * acc * (1 + TOL):
                for e in es[: i + 1]:
                    out[e] = nxt
                nxt += 1
                work.append(es[i + 1 :])
                break
    return out


@dataclass
class ReasonableColoring:
    palette_coloring: Coloring
    K: float
    palette_size: int
    segment_graph_out_degree: dict[int, int] = field(default_factory=dict)
    audit_ok: bool | None = None
    audit_delta: float | None = None


def default_K(eps: float) -> float:
    return 4 * (2 / eps) ** (1 + 2 / eps)


def reasonable_coloring(
    tree: WeightedRootedTree, regular_col: Mapping[str, int], eps: float, K: float | None = None, audit: bool = True
) -> ReasonableColoring:
    """Recolor the classes of a regular coloring with a small palette.

    Classes are vertices of a directed graph with s -> s' whenever s' looks
    longer than diam(s) from the top of s within radius K diam(s). Greedy
    coloring in decreasing diameter order gives the palette. Equal diameters
    are separated by a per-class relative jitter of 1e-12.
    """
    ok, bad = check_monotone(tree, regular_col)
    if not ok:
        raise PreconditionError(f"coloring is not monotone (color {bad})")
    if not is_regular(tree, regular_col):
        raise PreconditionError("input coloring is not regular")
    if not 0 < eps <= 1:
        raise InputError("eps must lie in (0, 1]")
    K = default_K(eps) if K is None else float(K)
    classes = color_classes(tree, regular_col)
    keys = sorted(classes, key=lambda k: classes[k][0])
    jitter = {k: 1 + i * 1e-12 for i, k in enumerate(keys)}
    elen = {e: tree.edge_length[e] * jitter[regular_col[e]] for e in tree.parent}
    jt = WeightedRootedTree(tree.root, tree.parent, elen)
    top = {k: tree.parent[classes[k][0]] for k in keys}
    diam = {k: sum(elen[e] for e in classes[k]) for k in keys}
    # vertices of each class (top vertex plus child endpoints) with distance from the top
    verts = {}
    for k in keys:
        acc = 0.0
        vs = [(top[k], 0.0)]
        for e in classes[k]:
            acc += elen[e]
            vs.append((e, acc))
        verts[k] = vs
    out_nb: dict[int, set[int]] = {k: set() for k in keys}
    for s in keys:
        R = K * diam[s]
        ps = top[s]
        for s2 in keys:
            if s2 == s:
                continue
            length = 0.0
            for x, dx in verts[s2]:
                if jt.distance(ps, x) <= R * (1 + TOL):
                    length = max(length, dx)
            if length > diam[s]:
                out_nb[s].add(s2)
    nb: dict[int, set[int]] = {k: set(out_nb[k]) for k in keys}
    for s in keys:
        for s2 in out_nb[s]:
            nb[s2].add(s)
    order = sorted(keys, key=lambda k: (-diam[k], k))
    pal: dict[int, int] = {}
    for s in order:
        used = {pal[t] for t in nb[s] if t in pal}
        x = 0
        while x in used:
            x += 1
        pal[s] = x
    palette = {e: pal[regular_col[e]] for e in tree.parent}
    res = ReasonableColoring(
        palette, K, len(set(pal.values())), {k: len(v) for k, v in out_nb.items()}
    )
    if audit:
        res.audit_delta = eps / 4
        res.audit_ok = check_reasonable(tree, palette, eps / 4)[0]
    return res


def check_reasonable(
    tree: WeightedRootedTree, palette: Mapping[str, int], delta: float
) -> tuple[bool, tuple[str, str] | None, float]:
    """Check some color separates the two branches of every pair by delta*d.

    Returns (flag, worst pair, worst ratio max_c |diff_c| / d).
    """
    _edges_check(tree, palette)
    worst = INF
    wp = None
    vs = sorted(tree.order)
    # color profile of every root path
    prof: dict[str, dict[int, float]] = {tree.root: {}}
    for v in tree.order[1:]:
        p = dict(prof[tree.parent[v]])
        k = palette[v]
        p[k] = p.get(k, 0.0) + tree.edge_length[v]
        prof[v] = p
    for i, u in enumerate(vs):
        for v in vs[i + 1 :]:
            w = tree.lca(u, v)
            pw = prof[w]
            pu, pv = prof[u], prof[v]
            best = 0.0
            for k in set(pu) | set(pv):
                a = pu.get(k, 0.0) - pw.get(k, 0.0)
                b = pv.get(k, 0.0) - pw.get(k, 0.0)
                best = max(best, abs(a - b))
            r = best / tree.distance(u, v)
            if r < worst:
                worst, wp = r, (u, v)
    if wp is None:
        return True, None, 1.0
    return worst >= delta * (1 - TOL), wp, worst
