"""Named tree families, random trees and the lamplighter group over a cycle."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tree_core import InputError, ResourceError, WeightedRootedTree

MAX_SST_VERTICES = 2_000_000
MAX_LAMPLIGHTER_N = 64
MAX_BFS_N = 16


def complete_binary_tree(k: int, edge_len: float = 1.0) -> WeightedRootedTree:
    """B_k: complete binary tree of depth k. Vertex ids encode the root path."""
    if k < 0:
        raise InputError("depth must be non-negative")
    if k > 24:
        raise ResourceError(f"complete_binary_tree supports k <= 24, got {k}")
    return sst([2] * k + [0], edge_len)


@dataclass(frozen=True)
class SSTProfile:
    """Spherically symmetric tree described by its downward degree sequence.

    Every vertex at depth t has ``seq[t]`` children and every edge has length
    ``edge_len``. Useful for trees far too large to materialize, since all
    root-leaf paths are isomorphic.
    """

    seq: tuple[int, ...]
    edge_len: float = 1.0

    def __post_init__(self) -> None:
        validate_degree_sequence(self.seq)
        if not self.edge_len > 0:
            raise InputError("edge_len must be positive")

    @property
    def height(self) -> int:
        return len(self.seq) - 1

    def level_sizes(self) -> list[int]:
        out = [1]
        for d in self.seq[:-1]:
            out.append(out[-1] * d)
        return out

    def n_vertices(self) -> int:
        return sum(self.level_sizes())

    def n_leaves(self) -> int:
        return self.level_sizes()[-1]

    def branch_depths(self) -> list[int]:
        """Depths of vertices with at least two children."""
        return [t for t, d in enumerate(self.seq) if d >= 2]

    def build(self) -> WeightedRootedTree:
        return sst(self.seq, self.edge_len)


def sst_profile_of(tree: WeightedRootedTree) -> SSTProfile | None:
    """The degree-sequence description of ``tree`` if it is spherically symmetric, else None."""
    lens = set(tree.edge_length.values())
    if len(lens) > 1:
        return None
    seq = []
    level = [tree.root]
    while level:
        degs = {len(tree.children[v]) for v in level}
        if len(degs) != 1:
            return None
        d = degs.pop()
        seq.append(d)
        level = [c for v in level for c in tree.children[v]]
    return SSTProfile(tuple(seq), lens.pop() if lens else 1.0)


def validate_degree_sequence(seq: Sequence[int]) -> None:
    if len(seq) == 0:
        raise InputError("degree sequence is empty")
    if seq[-1] != 0:
        raise InputError("degree sequence must end in 0")
    for t, d in enumerate(seq[:-1]):
        if int(d) != d or d < 1:
            raise InputError(f"interior entry {d!r} at position {t} must be a positive integer")


def sst(seq: Sequence[int], edge_len: float = 1.0) -> WeightedRootedTree:
    """Spherically symmetric tree with the given downward degree sequence.

    Vertex ids are ``"r"``, ``"r/0"``, ``"r/0/1"`` and so on.
    """
    seq = [int(x) for x in seq]
    validate_degree_sequence(seq)
    prof = SSTProfile(tuple(seq), edge_len)
    n = prof.n_vertices()
    if n > MAX_SST_VERTICES:
        raise ResourceError(f"SST would have {n} vertices (limit {MAX_SST_VERTICES})")
    parent: dict[str, str] = {}
    length: dict[str, float] = {}
    level = ["r"]
    for d in seq[:-1]:
        nxt = []
        for v in level:
            for i in range(d):
                c = f"{v}/{i}"
                parent[c] = v
                length[c] = float(edge_len)
                nxt.append(c)
        level = nxt
    return WeightedRootedTree("r", parent, length)


def cantor_raw(i: int) -> list[int]:
    """S_i: S_0 = (2), S_{i+1} = S_i, then 2^i - 1 ones, then S_i."""
    s = [2]
    for j in range(i):
        s = s + [1] * (2**j - 1) + s
    return s


def cantor_sequence(i: int) -> list[int]:
    """The Cantor degree sequence with its final entry replaced by 0."""
    if i < 0:
        raise InputError("i must be non-negative")
    if i > 10:
        raise ResourceError(f"cantor_sequence supports i <= 10, got {i}")
    s = cantor_raw(i)
    s[-1] = 0
    return s


def cantor_profile(i: int) -> SSTProfile:
    return SSTProfile(tuple(cantor_sequence(i)), 1.0)


def cantor_tree(i: int) -> WeightedRootedTree:
    """C_i with unit edges; only small i can be materialized."""
    return sst(cantor_sequence(i), 1.0)


def random_tree(n: int, weight_law: str | tuple = "unit", seed: int = 0) -> WeightedRootedTree:
    """Uniform random attachment tree on n vertices.

    ``weight_law`` is ``"unit"``, ``("uniform", a, b)`` or ``("dyadic", jmin, jmax)``
    (lengths 2^j with j uniform in [jmin, jmax]). Vertex ``i`` attaches to a
    uniformly chosen vertex among ``0..i-1``; ids are zero padded so that
    lexicographic and numeric order agree.
    """
    if n < 1:
        raise InputError("n must be at least 1")
    rng = np.random.default_rng(seed)
    law = _parse_law(weight_law)
    width = len(str(n - 1))
    ids = [f"v{i:0{width}d}" for i in range(n)]
    parent: dict[str, str] = {}
    length: dict[str, float] = {}
    for i in range(1, n):
        parent[ids[i]] = ids[int(rng.integers(0, i))]
        length[ids[i]] = _draw(law, rng)
    return WeightedRootedTree(ids[0], parent, length)


def _parse_law(law) -> tuple:
    if law == "unit" or law == ("unit",):
        return ("unit",)
    if isinstance(law, str):
        name, _, rest = law.partition("(")
        args = [float(x) for x in rest.rstrip(")").split(",") if x.strip()]
        law = (name.strip(), *args)
    name = law[0]
    if name == "uniform":
        a, b = float(law[1]), float(law[2])
        if not 0 < a <= b:
            raise InputError("uniform(a,b) needs 0 < a <= b")
        return ("uniform", a, b)
    if name == "dyadic":
        lo, hi = int(law[1]), int(law[2])
        if lo > hi:
            raise InputError("dyadic(jmin,jmax) needs jmin <= jmax")
        return ("dyadic", lo, hi)
    if name == "unit":
        return ("unit",)
    raise InputError(f"unknown weight law {law!r}")


def _draw(law: tuple, rng: np.random.Generator) -> float:
    if law[0] == "unit":
        return 1.0
    if law[0] == "uniform":
        return float(rng.uniform(law[1], law[2]))
    return float(2.0 ** int(rng.integers(law[1], law[2] + 1)))


def comb(n: int, spine_len: float = 1.0, tooth_len: float = 1.0) -> WeightedRootedTree:
    """Path s0..s_n with a single-edge tooth hanging from every spine vertex but the last."""
    parent: dict[str, str] = {}
    length: dict[str, float] = {}
    w = len(str(n))
    for i in range(1, n + 1):
        parent[f"s{i:0{w}d}"] = f"s{i - 1:0{w}d}"
        length[f"s{i:0{w}d}"] = spine_len
    for i in range(n):
        parent[f"t{i:0{w}d}"] = f"s{i:0{w}d}"
        length[f"t{i:0{w}d}"] = tooth_len
    return WeightedRootedTree(f"s{0:0{w}d}", parent, length)


# lamplighter over Z_N -------------------------------------------------------

@dataclass(frozen=True)
class LamplighterSpace:
    """L(Z_N). States are ``(mask, pos)``: lamp bitmask and walker position."""

    N: int

    def __post_init__(self) -> None:
        if not 1 <= self.N <= MAX_LAMPLIGHTER_N:
            raise InputError(f"N must be in [1, {MAX_LAMPLIGHTER_N}], got {self.N}")

    def check(self, s: tuple[int, int]) -> tuple[int, int]:
        mask, pos = int(s[0]), int(s[1])
        if not 0 <= pos < self.N:
            raise InputError(f"position {pos} outside [0, {self.N})")
        if mask < 0 or mask >> self.N:
            raise InputError(f"lamp mask {mask} has bits outside Z_{self.N}")
        return mask, pos

    def neighbors(self, s: tuple[int, int]) -> list[tuple[int, int]]:
        mask, pos = s
        N = self.N
        return [(mask, (pos + 1) % N), (mask, (pos - 1) % N), (mask ^ (1 << pos), pos)]

    def identity(self) -> tuple[int, int]:
        return (0, 0)


def _cover_walk(N: int, x1: int, x2: int, marks: list[int]) -> int:
    """Shortest walk on the N-cycle from x1 to x2 visiting every mark."""
    pts = sorted(set(marks) | {x1, x2})
    if len(pts) == 1:
        return 0
    # walks that traverse every edge of the cycle
    D = (x2 - x1) % N
    best = N + min(D, N - D)
    # drop the open arc between two cyclically consecutive points; the rest is
    # an arc from q clockwise to p that the walk must sweep
    for a in range(len(pts)):
        p, q = pts[a], pts[(a + 1) % len(pts)]
        gap = (q - p) % N or N
        L = N - gap
        s = (x1 - q) % N
        e = (x2 - q) % N
        best = min(best, L + min(s + L - e, L - s + e))
    return best


def lamplighter_distance(space: LamplighterSpace | int, s1: tuple[int, int], s2: tuple[int, int]) -> int:
    """Word metric on L(Z_N) with move and toggle generators."""
    if isinstance(space, int):
        space = LamplighterSpace(space)
    m1, x1 = space.check(s1)
    m2, x2 = space.check(s2)
    diff = m1 ^ m2
    marks = [i for i in range(space.N) if diff >> i & 1]
    return len(marks) + _cover_walk(space.N, x1, x2, marks)


def lamplighter_bfs_oracle(N: int, s1: tuple[int, int], s2: tuple[int, int]) -> int:
    """Exact Cayley-graph distance by breadth-first search (N <= 16)."""
    if N > MAX_BFS_N:
        raise ResourceError(f"BFS oracle supports N <= {MAX_BFS_N}")
    space = LamplighterSpace(N)
    a, b = space.check(s1), space.check(s2)
    return lamplighter_bfs_ball(N, a).get(b, -1) if a != b else 0


def lamplighter_bfs_ball(N: int, source: tuple[int, int], radius: int | None = None) -> dict:
    """BFS distances from ``source``, optionally truncated at ``radius``."""
    if N > MAX_BFS_N:
        raise ResourceError(f"BFS oracle supports N <= {MAX_BFS_N}")
    space = LamplighterSpace(N)
    dist = {source: 0}
    q = deque([source])
    while q:
        s = q.popleft()
        ds = dist[s]
        if radius is not None and ds >= radius:
            continue
        for t in space.neighbors(s):
            if t not in dist:
                dist[t] = ds + 1
                q.append(t)
    return dist
