"""Markov p-convexity ratios: exact propagation for small chains, seeded Monte Carlo otherwise."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .generators import LamplighterSpace, SSTProfile, lamplighter_distance
from .tree_core import InputError, PreconditionError, ResourceError, WeightedRootedTree

MAX_M = 14
MAX_EXACT_STATES = 4000
MAX_EXACT_CELLS = 16_000_000
FORK_MODES = ("definition", "shared")


@dataclass
class ChainSpec:
    """A Markov chain together with a metric on (the image of) its states.

    Explicit chains carry ``kernel``, ``initial`` and a distance matrix ``D``
    over state indices. Generative chains carry samplers only. Both expose
    ``sample_initial(rng)``, ``step(state, rng)`` and ``dist(a, b)``.
    """

    mode: str
    name: str
    dist: Callable[[Any, Any], float]
    init_sampler: Callable[[np.random.Generator], Any]
    step_sampler: Callable[[Any, np.random.Generator], Any]
    states: list | None = None
    kernel: np.ndarray | None = None
    initial: np.ndarray | None = None
    D: np.ndarray | None = None
    deterministic_start: bool = False

    def sample_initial(self, rng: np.random.Generator):
        return self.init_sampler(rng)

    def step(self, state, rng: np.random.Generator):
        return self.step_sampler(state, rng)

    @classmethod
    def explicit(
        cls,
        states: Sequence,
        kernel,
        initial,
        D=None,
        coords=None,
        name: str = "explicit",
    ) -> "ChainSpec":
        P = np.asarray(kernel, dtype=float)
        mu = np.asarray(initial, dtype=float)
        n = len(states)
        if P.shape != (n, n) or mu.shape != (n,):
            raise InputError("kernel must be n x n and initial of length n")
        if np.any(P < -1e-12) or np.any(np.abs(P.sum(axis=1) - 1) > 1e-9):
            raise InputError("kernel rows must be probability vectors")
        if np.any(mu < -1e-12) or abs(mu.sum() - 1) > 1e-9:
            raise InputError("initial must be a probability vector")
        if D is None:
            if coords is None:
                raise InputError("need a distance matrix or coordinates")
            X = np.asarray(coords, dtype=float).reshape(n, -1)
            D = np.sqrt(((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=2))
        D = np.asarray(D, dtype=float)
        if D.shape != (n, n):
            raise InputError("distance matrix has the wrong shape")
        cum = np.cumsum(P, axis=1)
        cum[:, -1] = 1.0
        mcum = np.cumsum(mu)
        mcum[-1] = 1.0

        def init(rng):
            return int(np.searchsorted(mcum, rng.random(), side="right"))

        def step(i, rng):
            return int(np.searchsorted(cum[i], rng.random(), side="right"))

        return cls(
            "explicit", name, lambda a, b: float(D[a, b]), init, step,
            list(states), P, mu, D, bool(np.count_nonzero(mu > 0) == 1),
        )

    @classmethod
    def generative(cls, initial, step, dist, name: str = "generative") -> "ChainSpec":
        """Chain started at the fixed state ``initial``."""
        return cls("generative", name, dist, lambda rng: initial, step, deterministic_start=True)

    @classmethod
    def from_json(cls, data: dict) -> "ChainSpec":
        try:
            states = [str(s) for s in data["states"]]
            m = data["map"]
            coords = [m[s] for s in states]
            return cls.explicit(states, data["kernel"], data["initial"], coords=coords, name="file")
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed chain descriptor: {exc}") from exc


@dataclass
class ConvexityEstimate:
    lhs: float
    rhs: float
    p: float
    m: int
    method: str
    samples: int | None = None
    seed: int | None = None
    stderr: float | None = None
    lhs_stderr: float | None = None
    rhs_stderr: float | None = None
    fork_mode: str = "definition"

    @property
    def degenerate(self) -> bool:
        return not self.rhs > 0

    @property
    def ratio(self) -> float | None:
        return None if self.degenerate else self.lhs / self.rhs

    @property
    def pi_lower(self) -> float | None:
        r = self.ratio
        return None if r is None else r ** (1 / self.p)

    def to_json(self) -> dict:
        return {
            "lhs": self.lhs, "rhs": self.rhs, "ratio": self.ratio, "pi_lower": self.pi_lower,
            "p": self.p, "m": self.m, "method": self.method, "samples": self.samples,
            "seed": self.seed, "stderr": self.stderr, "fork_mode": self.fork_mode,
            "degenerate": self.degenerate,
        }


def _check_pm(p: float, m: int) -> None:
    if not p >= 1:
        raise InputError("p must be at least 1")
    if not 0 <= m <= MAX_M:
        raise InputError(f"m must lie in [0, {MAX_M}]")


def stream(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator for one (seed, key...) cell."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed & (2**64 - 1), *key])))


def _one_sample(chain: ChainSpec, p: float, m: int, seed: int, s: int, fork_mode: str) -> tuple[float, float]:
    T = 2**m
    rng = stream(seed, s, 0, 0)
    path = [chain.sample_initial(rng)]
    for _ in range(T):
        path.append(chain.step(path[-1], rng))
    rhs = math.fsum(chain.dist(path[t], path[t - 1]) ** p for t in range(1, T + 1))
    terms = []
    for k in range(m + 1):
        h = 2**k
        scale = 2.0 ** (k * p)
        for t in range(1, T + 1):
            rng = stream(seed, s, t, k + 1)
            r = t - h
            if r >= 0:
                y, n = path[r], h
            else:
                y = path[0] if fork_mode == "shared" else chain.sample_initial(rng)
                n = t
            for _ in range(n):
                y = chain.step(y, rng)
            terms.append(chain.dist(path[t], y) ** p / scale)
    return math.fsum(terms), rhs


def estimate_convexity_mc(
    chain: ChainSpec, p: float, m: int, samples: int, seed: int, fork_mode: str = "definition"
) -> ConvexityEstimate:
    """Monte Carlo estimate of both sides of the Markov p-convexity inequality.

    Every base trajectory and every fork draws from its own counter-based
    stream keyed by (seed, sample, t, k), so results do not depend on the
    evaluation order. Forks with t - 2^k < 0 restart from time 0: from the
    same X_0 in ``"shared"`` mode, from a fresh draw of the initial
    distribution in ``"definition"`` mode (identical for fixed starts).
    """
    _check_pm(p, m)
    if samples < 1:
        raise InputError("samples must be positive")
    if fork_mode not in FORK_MODES:
        raise InputError(f"fork_mode must be one of {FORK_MODES}")
    L = np.empty(samples)
    R = np.empty(samples)
    for s in range(samples):
        L[s], R[s] = _one_sample(chain, p, m, seed, s, fork_mode)
    lhs = math.fsum(L) / samples
    rhs = math.fsum(R) / samples
    if samples > 1:
        lse = float(np.std(L, ddof=1) / math.sqrt(samples))
        rse = float(np.std(R, ddof=1) / math.sqrt(samples))
    else:
        lse = rse = math.nan
    se = None
    if rhs > 0 and samples > 1:
        # delta method for a ratio of means
        z = (L - lhs / rhs * R) / rhs
        se = float(np.std(z, ddof=1) / math.sqrt(samples))
    return ConvexityEstimate(lhs, rhs, p, m, "mc", samples, seed, se, lse, rse, fork_mode)


def compute_convexity_exact(chain: ChainSpec, p: float, m: int, fork_mode: str = "definition") -> ConvexityEstimate:
    """Exact expectations by propagating distributions.

    For a fork at time r >= 0 and horizon h, E d(X_{r+h}, X~_{r+h})^p equals
    sum_x mu_r(x) [Q D^p Q^T]_{xx} with Q = P^h.
    """
    _check_pm(p, m)
    if fork_mode not in FORK_MODES:
        raise InputError(f"fork_mode must be one of {FORK_MODES}")
    if chain.mode != "explicit":
        raise PreconditionError("exact evaluation needs an explicit chain")
    n = len(chain.states)
    if n > MAX_EXACT_STATES or n * n > MAX_EXACT_CELLS:
        raise ResourceError(f"{n} states exceed the exact evaluator's limit {MAX_EXACT_STATES}")
    P, Dp = chain.kernel, chain.D**p
    T = 2**m
    mu = [chain.initial]
    for _ in range(T):
        mu.append(mu[-1] @ P)
    w = {}
    Q = np.eye(n)
    for h in range(1, T + 1):
        Q = Q @ P
        w[h] = ((Q @ Dp) * Q).sum(axis=1)
    step_cost = (P * Dp).sum(axis=1)
    rhs = math.fsum(float(mu[t - 1] @ step_cost) for t in range(1, T + 1))
    terms = []
    for k in range(m + 1):
        h = 2**k
        for t in range(1, T + 1):
            r = t - h
            if r >= 0:
                v = float(mu[r] @ w[h])
            elif fork_mode == "shared":
                v = float(mu[0] @ w[t])
            else:
                v = float(mu[t] @ Dp @ mu[t])
            terms.append(v / 2.0 ** (k * p))
    return ConvexityEstimate(math.fsum(terms), rhs, p, m, "exact", fork_mode=fork_mode)


# named chains ----------------------------------------------------------------

def downward_walk_chain(tree: WeightedRootedTree, explicit: bool | None = None) -> ChainSpec:
    """Walk from the root to a uniformly random child each step; leaves absorb."""
    ch = tree.children

    def step(v, rng):
        c = ch[v]
        return c[int(rng.integers(len(c)))] if c else v

    n = len(tree.order)
    if explicit is None:
        explicit = n <= MAX_EXACT_STATES
    if not explicit:
        return ChainSpec.generative(tree.root, step, tree.distance, "downward_walk")
    if n > MAX_EXACT_STATES:
        raise ResourceError(f"explicit chain on {n} states exceeds the limit {MAX_EXACT_STATES}")
    idx = tree.index()
    P = np.zeros((n, n))
    for v in tree.order:
        c = ch[v]
        if c:
            for u in c:
                P[idx[v], idx[u]] = 1 / len(c)
        else:
            P[idx[v], idx[v]] = 1.0
    mu = np.zeros(n)
    mu[idx[tree.root]] = 1.0
    chain = ChainSpec.explicit(list(tree.order), P, mu, D=tree.distance_matrix(), name="downward_walk")
    return chain


def sst_downward_walk_exact(profile: SSTProfile, p: float, m: int) -> ConvexityEstimate:
    """Exact ratio for the downward walk on a spherically symmetric tree.

    Both copies of the walk sit at depth min(t, H) at time t, so only the
    depth at which they separate matters. This avoids building the tree.
    """
    _check_pm(p, m)
    H, seq, l = profile.height, profile.seq, profile.edge_len
    T = 2**m
    rhs = math.fsum(l**p for t in range(1, T + 1) if t <= H)
    terms = []
    for k in range(m + 1):
        h = 2**k
        for t in range(1, T + 1):
            a0, b = min(max(t - h, 0), H), min(t, H)
            together = 1.0
            acc = []
            for a in range(a0, b):
                acc.append(together * (1 - 1 / seq[a]) * (2 * (b - a) * l) ** p)
                together /= seq[a]
            terms.append(math.fsum(acc) / 2.0 ** (k * p))
    return ConvexityEstimate(math.fsum(terms), rhs, p, m, "exact")


def lamplighter_chain(N: int) -> ChainSpec:
    """From (f, i) move to i + 1 and flip the lamp there with probability 1/2."""
    space = LamplighterSpace(N)

    def step(s, rng):
        mask, pos = s
        pos = (pos + 1) % N
        if rng.random() < 0.5:
            mask ^= 1 << pos
        return (mask, pos)

    return ChainSpec.generative(space.identity(), step, lambda a, b: float(lamplighter_distance(space, a, b)), f"lamplighter({N})")


def cycle_walk_chain(N: int) -> ChainSpec:
    """Simple random walk on Z_N."""
    if N < 1:
        raise InputError("N must be positive")
    return ChainSpec.generative(
        0,
        lambda x, rng: (x + (1 if rng.random() < 0.5 else -1)) % N,
        lambda a, b: float(min((a - b) % N, (b - a) % N)),
        f"cycle({N})",
    )


def regular_tree_walk_chain(degree: int) -> ChainSpec:
    """Simple random walk on the infinite degree-regular tree; states are child-index tuples."""
    if degree < 2:
        raise InputError("degree must be at least 2")

    def step(x, rng):
        j = int(rng.integers(degree))
        if not x:
            return (j,)
        # neighbour 0 is the parent, 1..degree-1 are children
        return x[:-1] if j == 0 else x + (j,)

    def dist(a, b):
        c = 0
        for u, v in zip(a, b):
            if u != v:
                break
            c += 1
        return float(len(a) + len(b) - 2 * c)

    return ChainSpec.generative((), step, dist, f"regular_tree({degree})")


# identities and derived quantities --------------------------------------------

@dataclass
class DyadicIdentity:
    lhs: float
    rhs_id: float
    residual: float
    shifted_rhs: float
    shifted_lhs_bound_ok: bool


def dyadic_identity_residual(points) -> DyadicIdentity:
    """Compare sum of squared steps with its dyadic second-difference decomposition.

    ``points`` holds 2^m + 1 vectors. Also evaluates the shift-averaged lower
    bound, padding with x_j = x_0 for j <= 0.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0] - 1
    if n < 1 or n & (n - 1):
        raise InputError(f"need 2^m + 1 points, got {n + 1}")
    m = n.bit_length() - 1
    sq = lambda v: float(np.dot(v, v))
    lhs = math.fsum(sq(X[i] - X[i - 1]) for i in range(1, n + 1))
    parts = [sq(X[n] - X[0]) / n]
    for k in range(1, m + 1):
        h = 2**k
        parts.append(math.fsum(sq(X[j * h] - 2 * X[(2 * j - 1) * h // 2] + X[(j - 1) * h]) for j in range(1, n // h + 1)) / h)
    rhs = math.fsum(parts)
    at = lambda j: X[max(j, 0)]
    sparts = [0.5 * sq(X[n] - X[0]) / 4**m]
    for k in range(1, m + 1):
        h = 2**k
        sparts.append(0.5 / 4**k * math.fsum(sq(X[t] - 2 * at(t - h // 2) + at(t - h)) for t in range(1, n + 1)))
    shifted = math.fsum(sparts)
    residual = abs(lhs - rhs) / lhs if lhs > 0 else abs(rhs)
    ok = lhs >= shifted - 1e-9 * max(1.0, lhs)
    return DyadicIdentity(lhs, rhs, residual, shifted, ok)


def distortion_lower_bound(est: ConvexityEstimate, target_pi: float = 4.0) -> float:
    """pi_lower / Pi_p(target); a lower bound on the distortion into the target."""
    if est.degenerate:
        raise PreconditionError("estimate is degenerate (rhs = 0)")
    if not target_pi > 0:
        raise InputError("target_pi must be positive")
    return est.pi_lower / target_pi


@dataclass
class SpeedEstimate:
    speed_estimate: float
    stderr: float
    steps: int
    samples: int
    seed: int
    values: list = field(default_factory=list, repr=False)


def walk_speed(chain: ChainSpec, steps: int, samples: int, seed: int) -> SpeedEstimate:
    """Monte Carlo estimate of E d(X_0, X_T) / T."""
    if steps < 1 or samples < 1:
        raise InputError("steps and samples must be positive")
    vals = []
    for s in range(samples):
        rng = stream(seed, s, 0, 0)
        x0 = x = chain.sample_initial(rng)
        for _ in range(steps):
            x = chain.step(x, rng)
        vals.append(chain.dist(x0, x) / steps)
    v = np.array(vals)
    se = float(v.std(ddof=1) / math.sqrt(samples)) if samples > 1 else math.nan
    return SpeedEstimate(math.fsum(vals) / samples, se, steps, samples, seed, vals)
