"""Weak prototypes: verification, the rho subtree weight, and extraction from a tree."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence

from .coloring import INF, Coloring, quality
from .generators import SSTProfile
from .tree_core import InputError, PreconditionError, ResourceError, WeightedRootedTree, upward_r_net

TOL = 1e-12
MAX_RHO_VERTICES = 400
DEFAULT_BUDGET = 1_000_000


# induced paths ---------------------------------------------------------------

@dataclass(frozen=True)
class InducedPath:
    """Path metric on vertices taken down a monotone path; ``gaps`` are consecutive distances."""

    vertices: tuple
    gaps: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.gaps) != max(len(self.vertices) - 1, 0):
            raise InputError("need one gap per consecutive vertex pair")
        if any(not g > 0 for g in self.gaps):
            raise InputError("gaps must be positive")

    @property
    def length(self) -> float:
        return math.fsum(self.gaps)

    @classmethod
    def from_gaps(cls, gaps: Sequence[float]) -> "InducedPath":
        return cls(tuple(range(len(gaps) + 1)), tuple(float(g) for g in gaps))

    @classmethod
    def on_tree(cls, tree: WeightedRootedTree, vertices: Sequence[str]) -> "InducedPath":
        vs = tuple(vertices)
        for a, b in zip(vs, vs[1:]):
            if not (a != b and tree.is_ancestor(a, b)):
                raise InputError(f"{a!r} is not a strict ancestor of {b!r}")
        return cls(vs, tuple(tree.depth[b] - tree.depth[a] for a, b in zip(vs, vs[1:])))


def weak_fraction(gaps: Sequence[float], delta: float) -> float:
    """Share of the total length made of gaps at most delta times the total."""
    total = math.fsum(gaps)
    if total <= 0:
        return 1.0
    cut = delta * total * (1 + TOL)
    return math.fsum(g for g in gaps if g <= cut) / total


def _is_weak(gaps: Sequence[float], eps: float, delta: float) -> bool:
    return weak_fraction(gaps, delta) >= eps * (1 - TOL)


def weak_path_check(path: InducedPath, eps: float, delta: float) -> tuple[bool, float]:
    if not path.gaps:
        raise InputError("path has no edges")
    frac = weak_fraction(path.gaps, delta)
    return frac >= eps * (1 - TOL), frac


def degree2_weak_check(
    tree: WeightedRootedTree, u: str, v: str, eps: float, delta: float
) -> tuple[bool, InducedPath, float]:
    """Weakness of P(u, v) measured on u, the branching vertices strictly between, and v."""
    if u == v or not tree.is_ancestor(u, v):
        raise InputError(f"{u!r} is not a strict ancestor of {v!r}")
    path = tree.path(u, v)
    keep = [u] + [w for w in path[1:-1] if len(tree.children[w]) >= 2] + [v]
    ip = InducedPath.on_tree(tree, keep)
    ok, frac = weak_path_check(ip, eps, delta)
    return ok, ip, frac


# verification ----------------------------------------------------------------

@dataclass
class PathAudit:
    leaf: str
    induced: tuple
    gaps: tuple[float, ...]
    fraction: float
    ok: bool


@dataclass
class PrototypeWitness:
    subtree: WeightedRootedTree | SSTProfile
    eps: float
    delta: float
    R: float
    height_ratio: float
    per_path_audits: list[PathAudit]
    ok: bool = True

    def to_json(self) -> dict:
        if isinstance(self.subtree, SSTProfile):
            sub = {"sst": list(self.subtree.seq), "edge_len": self.subtree.edge_len}
        else:
            sub = self.subtree.to_json()
        return {
            "subtree": sub,
            "params": {"eps": self.eps, "delta": self.delta, "R": self.R},
            "height_ratio": self.height_ratio,
            "audits": [
                {"leaf": a.leaf, "gaps": list(a.gaps), "fraction": a.fraction, "ok": a.ok}
                for a in self.per_path_audits
            ],
        }


@dataclass
class PrototypeFailure:
    reason: str
    vertex: str | None = None
    path: tuple | None = None
    value: float | None = None
    ok: bool = False


def _sst_check(prof: SSTProfile, eps: float, delta: float, R: float) -> PrototypeWitness | PrototypeFailure:
    for t, d in enumerate(prof.seq[:-1]):
        if d > 2:
            return PrototypeFailure(f"vertices at depth {t} have {d} children", vertex=f"depth {t}")
    keep = [0] + [t for t in range(1, prof.height) if prof.seq[t] >= 2] + [prof.height]
    if prof.height == 0:
        return PrototypeWitness(prof, eps, delta, R, 1.0, [])
    gaps = tuple((b - a) * prof.edge_len for a, b in zip(keep, keep[1:]))
    frac = weak_fraction(gaps, delta)
    audit = PathAudit("depth %d" % prof.height, tuple(keep), gaps, frac, frac >= eps * (1 - TOL))
    if not audit.ok:
        return PrototypeFailure("root-leaf paths are not degree-2 weak", path=tuple(keep), value=frac)
    return PrototypeWitness(prof, eps, delta, R, 1.0, [audit])


def verify_weak_prototype(
    tree: WeightedRootedTree | SSTProfile, eps: float, delta: float, R: float
) -> PrototypeWitness | PrototypeFailure:
    """Check branching, degree-2 weakness of every root-leaf path, and the height ratio.

    Spherically symmetric trees given as profiles are checked on one
    representative root-leaf path.
    """
    if isinstance(tree, SSTProfile):
        return _sst_check(tree, eps, delta, R)
    for v in tree.order:
        if len(tree.children[v]) > 2:
            return PrototypeFailure(f"{v!r} has {len(tree.children[v])} children", vertex=v)
    leaves = tree.leaves()
    if leaves == [tree.root]:
        return PrototypeWitness(tree, eps, delta, R, 1.0, [])
    audits = []
    for leaf in leaves:
        ok, ip, frac = degree2_weak_check(tree, tree.root, leaf, eps, delta)
        audits.append(PathAudit(leaf, ip.vertices, ip.gaps, frac, ok))
        if not ok:
            return PrototypeFailure("root-leaf path is not degree-2 weak", vertex=leaf, path=ip.vertices, value=frac)
    hs = [tree.depth[x] for x in leaves]
    ratio = max(hs) / min(hs)
    if ratio > R * (1 + TOL):
        return PrototypeFailure(f"height ratio {ratio} exceeds {R}", value=ratio)
    return PrototypeWitness(tree, eps, delta, R, ratio, audits)


# clusters ----------------------------------------------------------------------

@dataclass
class ClusterDecomposition:
    maximal_clusters: list[tuple[int, int]]
    disjoint_clusters: list[tuple[int, int]]
    covered_fraction: float
    tau: float
    hypothesis: bool
    conclusion_ok: bool


def cluster_decomposition(path: InducedPath, delta: float, alpha: float = 0.25) -> ClusterDecomposition:
    """Maximal delta-clusters and their chunking into pieces of length in [tau d delta, (2 tau + 1) d delta].

    Clusters are half-open gap index ranges ``(i, j)`` covering gaps i..j-1.
    """
    if not 0 < alpha < 0.5:
        raise InputError("alpha must lie in (0, 1/2)")
    if not path.gaps:
        raise InputError("path has no edges")
    tau = 1 / (2 - 4 * alpha)
    if tau * delta >= 1:
        raise InputError(f"tau * delta = {tau * delta} >= 1")
    d = path.length
    a = delta * d * (1 + TOL)
    A = tau * delta * d
    maximal, i = [], 0
    n = len(path.gaps)
    while i < n:
        if path.gaps[i] <= a:
            j = i
            while j < n and path.gaps[j] <= a:
                j += 1
            maximal.append((i, j))
            i = j
        else:
            i += 1
    pieces = []
    covered = 0.0
    for i, j in maximal:
        seg = path.gaps[i:j]
        if math.fsum(seg) < A * (1 - TOL):
            continue
        covered += math.fsum(seg)
        start, acc, own = i, 0.0, []
        for k in range(i, j):
            acc += path.gaps[k]
            if acc >= A * (1 - TOL):
                own.append((start, k + 1))
                start, acc = k + 1, 0.0
        if start < j:
            # short remainder joins the last piece
            own[-1] = (own[-1][0], j)
        pieces.extend(own)
    frac = covered / d
    hyp = _is_weak(path.gaps, 0.5 + alpha, delta)
    return ClusterDecomposition(maximal, pieces, frac, tau, hyp, (not hyp) or frac >= alpha * (1 - TOL))


def strong_downgrade(eps: float, delta: float) -> float:
    """(delta / (4 eps))^(3 / eps)."""
    if not 0 < delta < eps <= 0.5:
        raise InputError("need 0 < delta < eps <= 1/2")
    return (delta / (4 * eps)) ** (3 / eps)


# rho -----------------------------------------------------------------------------

@dataclass
class RhoResult:
    value: float | None
    witness: WeightedRootedTree | None
    nodes: int


class _Budget:
    def __init__(self, cap: int):
        self.cap, self.used = cap, 0

    def tick(self) -> None:
        self.used += 1
        if self.used > self.cap:
            raise ResourceError(f"search budget of {self.cap} nodes exhausted")


def _rho_core(
    tree: WeightedRootedTree,
    y: str,
    first: Sequence[str],
    prefix: tuple[float, ...],
    eps: float,
    delta: float,
    L: float,
    budget: _Budget,
) -> tuple[float | None, set[str]]:
    """Best subtree of {y} + (subtrees of ``first``) in ``tree``.

    Returns the largest achievable minimum root-leaf distance and the vertex
    set of a subtree attaining it.
    """
    lq = math.fsum(prefix)
    cap = 3 * L * (1 + TOL)
    base = tree.depth[y]
    memo: dict = {}

    def solve(v: str, pre: tuple, lbp: float):
        key = (v, pre, lbp)
        if key in memo:
            return memo[key]
        budget.tick()
        dv = tree.depth[v] - base
        out = None
        if lq + dv <= cap:
            gaps = pre + ((dv - lbp,) if dv > lbp else ())
            if _is_weak(gaps, eps, delta):
                out = (dv, ("leaf",))
            kids = first if v == y else tree.children[v]
            sub = []
            for c in kids:
                r = solve(c, pre, lbp)
                if r is not None and (out is None or r[0] > out[0]):
                    out = (r[0], ("one", c))
            if len(kids) >= 2:
                for c in kids:
                    r = solve(c, gaps, dv)
                    if r is not None:
                        sub.append((r[0], c))
                if len(sub) >= 2:
                    sub.sort(key=lambda x: (-x[0], x[1]))
                    val = sub[1][0]
                    if out is None or val > out[0]:
                        out = (val, ("two", sub[0][1], sub[1][1], gaps, dv))
        memo[key] = out
        return out

    res = solve(y, prefix, 0.0)
    if res is None:
        return None, set()
    keep: set[str] = set()
    stack = [(y, prefix, 0.0)]
    while stack:
        v, pre, lbp = stack.pop()
        keep.add(v)
        choice = memo[(v, pre, lbp)][1]
        if choice[0] == "one":
            stack.append((choice[1], pre, lbp))
        elif choice[0] == "two":
            _, c1, c2, gaps, dv = choice
            stack.append((c1, gaps, dv))
            stack.append((c2, gaps, dv))
    return res[0], keep


def _subtree_from(tree: WeightedRootedTree, root: str, keep: Iterable[str]) -> WeightedRootedTree:
    keep = set(keep)
    return WeightedRootedTree(
        root,
        {v: tree.parent[v] for v in keep if v != root},
        {v: tree.edge_length[v] for v in keep if v != root},
    )


def rho(
    eps: float, delta: float, L: float, Q: InducedPath, F: WeightedRootedTree, budget: int = DEFAULT_BUDGET
) -> RhoResult:
    """Largest minimum root-leaf distance over qualifying subtrees of F.

    A subtree F' (containing the root y of F) qualifies when its vertices
    have at most two children, every root-leaf path of F' prefixed by Q is
    (eps, delta)-weak on Q plus the branching vertices and endpoints, and
    every path from the start of Q to a leaf of F' has length at most 3L.
    ``value`` is None when nothing qualifies. Only the gaps of Q are used.
    """
    if len(F) > MAX_RHO_VERTICES:
        raise ResourceError(f"rho supports |F| <= {MAX_RHO_VERTICES}, got {len(F)}")
    b = _Budget(budget)
    val, keep = _rho_core(F, F.root, F.children[F.root], tuple(Q.gaps), eps, delta, L, b)
    wit = _subtree_from(F, F.root, keep) if val is not None else None
    return RhoResult(val, wit, b.used)


def rho_bruteforce(eps: float, delta: float, L: float, Q: InducedPath, F: WeightedRootedTree) -> float | None:
    """Enumerate every rooted subtree with branching at most 2 (small F only)."""
    if len(F) > 15:
        raise ResourceError("brute force supports |F| <= 15")

    def options(v: str) -> list[frozenset]:
        out = [frozenset([v])]
        kids = F.children[v]
        subs = {c: options(c) for c in kids}
        for c in kids:
            out += [frozenset([v]) | s for s in subs[c]]
        for i, c1 in enumerate(kids):
            for c2 in kids[i + 1:]:
                out += [frozenset([v]) | s1 | s2 for s1 in subs[c1] for s2 in subs[c2]]
        return out

    best = None
    lq = Q.length
    for S in options(F.root):
        kids = {v: [c for c in F.children[v] if c in S] for v in S}
        leaves = [v for v in S if not kids[v]]
        good = True
        for leaf in leaves:
            path = F.path(F.root, leaf)
            pts = [F.root] + [w for w in path[1:-1] if len(kids[w]) == 2] + ([leaf] if leaf != F.root else [])
            gaps = list(Q.gaps) + [F.distance(a, b) for a, b in zip(pts, pts[1:])]
            if lq + F.depth[leaf] - F.depth[F.root] > 3 * L * (1 + TOL) or not _is_weak(gaps, eps, delta):
                good = False
                break
        if good:
            val = min(F.depth[x] - F.depth[F.root] for x in leaves)
            best = val if best is None else max(best, val)
    return best


# the special coloring --------------------------------------------------------------

@dataclass(frozen=True)
class ExtractionParams:
    """Constants of the extraction pipeline; defaults are the worst-case theoretical values."""

    eps0: float = 1 / 2500
    delta_exp: float = 1 / 2880
    scale_base: float = 4.0
    net_factor: float = 240.0
    R_cap: float = 6800.0
    budget: int = DEFAULT_BUDGET


def _floor_log(x: float, b: float) -> int:
    k = math.floor(math.log(x, b))
    while b ** (k + 1) <= x:
        k += 1
    while b**k > x:
        k -= 1
    return k


@dataclass
class SpecialColoring:
    coloring: Coloring
    g: dict[str, float]
    mu: dict[str, dict[str, float | None]]
    breakpoints: dict[str, list[str]]
    witnesses: dict[tuple[str, str], set[str]]
    lam: dict[int, dict[str, str]]
    t_of_s: dict[int, int]
    weak_delta: float


class _Scales:
    def __init__(self, tree: WeightedRootedTree, p: ExtractionParams, weak_delta: float):
        self.tree, self.p, self.b = tree, p, p.scale_base
        self.factor = p.net_factor / weak_delta
        self.t_of_s: dict[int, int] = {}
        self.lam: dict[int, dict[str, str]] = {}

    def t(self, s: int) -> int:
        if s not in self.t_of_s:
            # least t with b^t >= factor * b^s
            t = s + math.ceil(math.log(self.factor, self.b) - 1e-12)
            while self.b ** (t - 1) >= self.factor * self.b**s:
                t -= 1
            while self.b**t < self.factor * self.b**s:
                t += 1
            self.t_of_s[s] = t
        return self.t_of_s[s]

    def lam_t(self, t: int) -> dict[str, str]:
        """lambda_t(w): furthest net point on P(w) within 2 b^t of w."""
        if t not in self.lam:
            tree, R = self.tree, self.b**t
            net = upward_r_net(tree, R)
            out = {}
            for w in tree.order:
                best = w
                for a in tree.ancestors(w):
                    if tree.depth[w] - tree.depth[a] > 2 * R * (1 + TOL):
                        break
                    if a in net:
                        best = a
                out[w] = best
            self.lam[t] = out
        return self.lam[t]


def _g_rule(tree: WeightedRootedTree, v: str, bps: Sequence[str], g: dict, b: float) -> float:
    out = INF
    for u in bps:
        dd = tree.depth[v] - tree.depth[u]
        if g[u] == INF or dd < b ** g[u]:
            out = min(out, _floor_log(dd, b))
    return out


def _break_path(tree: WeightedRootedTree, v: str, s: int, sc: _Scales, g: dict, bps: Sequence[str]) -> list[str]:
    lam = sc.lam_t(sc.t(s))
    x = lam[v]
    pts = {x} | {w for w in bps if g[w] == g[v] and lam[w] == x}
    pts.add(v)
    return sorted(pts, key=lambda w: tree.depth[w])


def construct_special_coloring(tree: WeightedRootedTree, delta: float, params: ExtractionParams = ExtractionParams()) -> SpecialColoring:
    """Scale-selector coloring whose continuation rule maximizes rho.

    At v the weight of the branch through child z is rho evaluated on the
    branch with the break path Q_s(v) as prefix, where s = g(v).
    """
    if not 0 < delta < 1:
        raise InputError("delta must lie in (0, 1)")
    b = params.scale_base
    wd = delta**params.delta_exp
    sc = _Scales(tree, params, wd)
    jmin = _floor_log(tree.min_edge(), b) if len(tree) > 1 else 0
    jmax = (_floor_log(max(tree.height(), tree.min_edge() if len(tree) > 1 else 1.0), b) + 2)
    budget = _Budget(params.budget)
    col: Coloring = {}
    g: dict[str, float] = {tree.root: INF}
    bps: dict[str, list[str]] = {tree.root: []}
    mu: dict[str, dict[str, float | None]] = {}
    wits: dict[tuple[str, str], set[str]] = {}
    nxt = 0
    for v in tree.order:
        if v != tree.root:
            p = tree.parent[v]
            bps[v] = bps[p] + ([p] if p == tree.root or col[v] != col[p] else [])
            g[v] = min(max(_g_rule(tree, v, bps[v], g, b), jmin), jmax)
        kids = tree.children[v]
        if not kids:
            continue
        s = jmax if g[v] == INF else int(g[v])
        Q = InducedPath.on_tree(tree, _break_path(tree, v, s, sc, g, bps[v]))
        L = b ** sc.t(s)
        m = {}
        for z in kids:
            val, keep = _rho_core(tree, v, [z], Q.gaps, params.eps0, wd, L, budget)
            m[z] = val
            wits[(v, z)] = keep
        mu[v] = m
        rank = {z: (-1.0 if m[z] is None else m[z]) for z in kids}
        top = max(rank.values())
        w = min(z for z in kids if rank[z] == top)
        for z in kids:
            if z == w and v != tree.root:
                col[z] = col[v]
            else:
                col[z] = nxt
                nxt += 1
    return SpecialColoring(col, g, mu, bps, wits, sc.lam, sc.t_of_s, wd)


# extraction -----------------------------------------------------------------------

@dataclass
class ExtractionResult:
    status: str  # "witness", "strong" or "inconclusive"
    witness: PrototypeWitness | None = None
    certificate: dict | None = None
    route: str | None = None
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"status": self.status, "route": self.route, "details": self.details}
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        if self.certificate is not None:
            out["certificate"] = self.certificate
        out["rho_reading"] = "max over qualifying subtrees of the minimum root-leaf distance"
        return out


def _monotone_pairs(tree: WeightedRootedTree):
    for v in tree.order:
        for a in tree.ancestors(v)[1:]:
            yield a, v


def _crucial_path(tree: WeightedRootedTree, sp: SpecialColoring, params: ExtractionParams) -> dict | None:
    """Search for the break path of the gluing argument.

    Over ancestor pairs (u, v) pick the one whose breakpoint gaps are most
    dominated by short color classes; within its short runs collect the
    breakpoints of the matching scale s, bucket them by lambda_t and keep
    the largest bucket.
    """
    b, wd, col = params.scale_base, sp.weak_delta, sp.coloring
    short = wd / params.net_factor
    best = None
    for u, v in _monotone_pairs(tree):
        d = tree.depth[v] - tree.depth[u]
        path = tree.path(u, v)
        pts = [u] + [x for x, c in zip(path[1:-1], path[2:]) if col[x] != col[c]] + [v]
        gaps = [tree.depth[y] - tree.depth[x] for x, y in zip(pts, pts[1:])]
        frac = math.fsum(gg for gg in gaps if gg < short * d) / d
        if best is None or frac > best[0]:
            best = (frac, u, v, pts)
    if best is None:
        return None
    frac, u, v, pts = best
    L = tree.depth[v] - tree.depth[u]
    s = _floor_log(short * L, b)
    if b**s < short * L:
        s += 1
    sc = _Scales(tree, params, wd)
    t = sc.t(s)
    lam = sc.lam_t(t)
    cand = [w for w in pts[1:-1] if sp.g.get(w) == s]
    buckets: dict[str, list[str]] = {}
    for w in cand:
        buckets.setdefault(lam[w], []).append(w)
    info = {"pair": [u, v], "short_fraction": frac, "L": L, "s": s, "t": t, "candidates": len(cand)}
    if not buckets:
        return {**info, "Q": None}
    x = max(sorted(buckets), key=lambda k: len(buckets[k]))
    Q = [x] + [w for w in sorted(buckets[x], key=lambda w: tree.depth[w]) if w != x]
    return {**info, "Q": Q, "x": x}


def _glue(tree: WeightedRootedTree, Q: list[str], sp: SpecialColoring, params: ExtractionParams, L: float) -> tuple[set[str], dict]:
    """Reverse induction: hang a rho witness off every w_j beside the path to w_N."""
    x, ws = Q[0], Q[1:]
    wN = ws[-1]
    keep = set(tree.path(ws[-2], wN)[1:]) if len(ws) >= 2 else {wN}
    shortfall = []
    budget = _Budget(params.budget)
    for j in range(len(ws) - 2, -1, -1):
        w = ws[j]
        z = tree.path(w, wN)[1]
        need = tree.depth[wN] - tree.depth[z]
        prefix = InducedPath.on_tree(tree, [x] + ws[: j + 1] if x != ws[0] else ws[: j + 1]).gaps
        best = None
        for c in tree.children[w]:
            if c == z:
                continue
            val, sub = _rho_core(tree, w, [c], prefix, params.eps0, sp.weak_delta, L, budget)
            if val is not None and (best is None or val > best[0]):
                best = (val, sub)
        keep.add(w)
        if best is not None:
            keep |= best[1]
            if best[0] < need:
                shortfall.append((w, best[0], need))
        else:
            shortfall.append((w, None, need))
        if j > 0:
            keep |= set(tree.path(ws[j - 1], w)[1:])
    keep |= set(tree.path(x, ws[0]))
    return keep, {"shortfall": shortfall}


def extract_weak_prototype(
    tree: WeightedRootedTree, delta: float, params: ExtractionParams = ExtractionParams()
) -> ExtractionResult:
    """Either certify that the special coloring is delta-strong or find a weak prototype subtree.

    The gluing route follows the break-path construction. When it does not
    produce a valid prototype, a direct rho search from the root is tried.
    Any witness returned has passed ``verify_weak_prototype``; otherwise the
    result is ``"inconclusive"`` with the partial progress recorded.
    """
    try:
        sp = construct_special_coloring(tree, delta, params)
    except ResourceError as exc:
        return ExtractionResult("inconclusive", details={"error": str(exc), "stage": "coloring"})
    q = quality(tree, sp.coloring)
    details: dict = {"strong_delta": q.strong_delta, "weak_delta": sp.weak_delta}
    if q.strong_delta >= delta:
        return ExtractionResult("strong", certificate=q.report(), details=details)
    wd = sp.weak_delta
    try:
        crucial = _crucial_path(tree, sp, params)
    except ResourceError as exc:
        crucial = {"error": str(exc)}
    details["crucial"] = {k: v for k, v in (crucial or {}).items()}
    if crucial and crucial.get("Q") and len(crucial["Q"]) >= 2:
        Q = crucial["Q"]
        try:
            keep, info = _glue(tree, Q, sp, params, params.scale_base ** crucial["t"])
            details["gluing"] = info
            cand = _subtree_from(tree, Q[0], keep)
            res = verify_weak_prototype(cand, params.eps0, wd, params.R_cap)
            if res.ok:
                return ExtractionResult("witness", witness=res, route="gluing", details=details)
            details["gluing_failure"] = res.reason
        except ResourceError as exc:
            details["gluing_failure"] = str(exc)
    try:
        b = _Budget(params.budget)
        h = tree.height()
        val, keep = _rho_core(tree, tree.root, tree.children[tree.root], (), params.eps0, wd, h / 3 if h else 1.0, b)
    except ResourceError as exc:
        details["direct_failure"] = str(exc)
        return ExtractionResult("inconclusive", details=details)
    if val is not None and val > 0:
        cand = _subtree_from(tree, tree.root, keep)
        res = verify_weak_prototype(cand, params.eps0, wd, params.R_cap)
        if res.ok:
            return ExtractionResult("witness", witness=res, route="direct", details=details)
        details["direct_failure"] = res.reason
    else:
        details["direct_failure"] = "no qualifying subtree"
    return ExtractionResult("inconclusive", details=details)


# bounds and normalization ------------------------------------------------------------

def prototype_convexity_bound(eps: float, delta: float, R: float, p: float, normalized: bool = False) -> float:
    """Lower bound on Pi_p of the normalized prototype: ((e/4)[log2(e/delta) - 4])^(1/p), clamped at 0.

    The fraction e is eps / (2R), the price of padding every leaf to a common
    power-of-two height. Pass ``normalized=True`` when the prototype already
    is unweighted with height 2^m and height ratio 1; then e = eps.
    """
    if not (0 < delta and 0 < eps <= 1 and R >= 1 and p >= 1):
        raise InputError("need 0 < delta, 0 < eps <= 1, R >= 1, p >= 1")
    if normalized and R != 1:
        raise InputError("a normalized prototype has height ratio 1")
    e = eps if normalized else eps / (2 * R)
    bracket = e / 4 * (math.log2(e / delta) - 4)
    return max(0.0, bracket) ** (1 / p)


def normalized_profile(prof: SSTProfile) -> SSTProfile:
    """Pad a unit-edge SST to the next power-of-two height (all leaves at once)."""
    if prof.edge_len != 1.0:
        raise PreconditionError("only unit-edge profiles are supported")
    H = prof.height
    target = 1 if H <= 1 else 2 ** math.ceil(math.log2(H))
    seq = list(prof.seq[:-1]) + [1] * (target - H) + [0]
    return SSTProfile(tuple(seq), 1.0)


# fixtures -----------------------------------------------------------------------------

def list_fixtures() -> list[str]:
    root = resources.files("arboreal") / "fixtures"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_fixture(name: str) -> dict:
    """Fixture record with a ``tree`` (edge list) or ``sst`` entry and expected outcomes."""
    path = resources.files("arboreal") / "fixtures" / f"{name}.json"
    if not path.is_file():
        raise InputError(f"unknown fixture {name!r}")
    data = json.loads(path.read_text())
    if "tree" in data:
        data["tree_obj"] = WeightedRootedTree.from_json(data["tree"])
    if "sst" in data:
        data["profile"] = SSTProfile(tuple(data["sst"]), float(data.get("edge_len", 1.0)))
    return data
