import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arboreal.generators import SSTProfile, complete_binary_tree, sst
from arboreal.markov import (
    ChainSpec,
    compute_convexity_exact,
    cycle_walk_chain,
    distortion_lower_bound,
    downward_walk_chain,
    dyadic_identity_residual,
    estimate_convexity_mc,
    lamplighter_chain,
    regular_tree_walk_chain,
    sst_downward_walk_exact,
    stream,
    walk_speed,
)
from arboreal.tree_core import InputError, PreconditionError, ResourceError


def random_chain(rng, n, point_mass=True, dim=5):
    P = rng.random((n, n)) ** 3
    P /= P.sum(axis=1, keepdims=True)
    if point_mass:
        mu = np.zeros(n)
        mu[0] = 1.0
    else:
        mu = rng.random(n)
        mu /= mu.sum()
    X = rng.normal(size=(n, dim))
    return ChainSpec.explicit(list(range(n)), P, mu, coords=X)


def brute_force(chain, p, m, fork_mode="definition"):
    """Enumerate every trajectory and every fork continuation."""
    P, mu, D = chain.kernel, chain.initial, chain.D
    n, T = len(mu), 2**m

    def paths(start_dist, length):
        for xs in itertools.product(range(n), repeat=length + 1):
            pr = start_dist[xs[0]]
            for a, b in zip(xs, xs[1:]):
                pr *= P[a, b]
            if pr > 0:
                yield xs, pr

    lhs = rhs = 0.0
    for xs, pr in paths(mu, T):
        rhs += pr * sum(D[xs[t], xs[t - 1]] ** p for t in range(1, T + 1))
        for k in range(m + 1):
            h = 2**k
            for t in range(1, T + 1):
                r = t - h
                if r >= 0:
                    start, steps = np.eye(n)[xs[r]], h
                elif fork_mode == "shared":
                    start, steps = np.eye(n)[xs[0]], t
                else:
                    start, steps = mu, t
                for ys, q in paths(start, steps):
                    lhs += pr * q * D[xs[t], ys[-1]] ** p / 2 ** (k * p)
    return lhs, rhs


@pytest.mark.parametrize("mode,point_mass", [("definition", True), ("definition", False), ("shared", False)])
@pytest.mark.parametrize("seed", range(3))
def test_exact_matches_enumeration(seed, mode, point_mass):
    rng = np.random.default_rng(seed)
    ch = random_chain(rng, 3, point_mass)
    est = compute_convexity_exact(ch, 2.0, 2, mode)
    lhs, rhs = brute_force(ch, 2.0, 2, mode)
    assert est.lhs == pytest.approx(lhs, rel=1e-10)
    assert est.rhs == pytest.approx(rhs, rel=1e-10)


def test_mc_agrees_with_exact():
    ch = random_chain(np.random.default_rng(5), 4, point_mass=False)
    ex = compute_convexity_exact(ch, 2.0, 2, "shared")
    mc = estimate_convexity_mc(ch, 2.0, 2, 4000, seed=1, fork_mode="shared")
    assert abs(mc.ratio - ex.ratio) <= 4 * mc.stderr


def test_mc_reproducible():
    ch = lamplighter_chain(8)
    a = estimate_convexity_mc(ch, 2.0, 3, 50, seed=9)
    b = estimate_convexity_mc(ch, 2.0, 3, 50, seed=9)
    assert a.to_json() == b.to_json()
    assert a.lhs != estimate_convexity_mc(ch, 2.0, 3, 50, seed=10).lhs


def test_streams_are_keyed():
    assert stream(1, 2, 3).random() == stream(1, 2, 3).random()
    assert stream(1, 2, 3).random() != stream(1, 3, 2).random()


@pytest.mark.parametrize("seed", range(15))
def test_euclidean_safety_net(seed):
    rng = np.random.default_rng(100 + seed)
    n = int(rng.integers(2, 12))
    m = int(rng.integers(1, 5))
    ch = random_chain(rng, n, point_mass=bool(seed % 2))
    est = compute_convexity_exact(ch, 2.0, m, "shared")
    assert est.ratio <= 16 + 1e-9


def test_definition_mode_counterexample():
    # two absorbing states and a random start: nothing moves, yet restarted forks disagree
    ch = ChainSpec.explicit([0, 1], np.eye(2), [0.5, 0.5], coords=[[0.0], [1.0]])
    est = compute_convexity_exact(ch, 2.0, 1, "definition")
    assert est.rhs == 0 and est.lhs > 0 and est.degenerate
    assert compute_convexity_exact(ch, 2.0, 1, "shared").lhs == 0


@pytest.mark.parametrize("seq", [(2, 2, 0), (2, 1, 2, 0), (3, 1, 2, 2, 0), (2, 2, 2, 2, 0)])
@pytest.mark.parametrize("m", [1, 2, 3])
def test_lumped_matches_explicit(seq, m):
    prof = SSTProfile(seq, 1.5)
    a = sst_downward_walk_exact(prof, 2.0, m)
    b = compute_convexity_exact(downward_walk_chain(prof.build(), explicit=True), 2.0, m)
    assert a.lhs == pytest.approx(b.lhs, rel=1e-12)
    assert a.rhs == pytest.approx(b.rhs, rel=1e-12)


def test_binary_downward_walk_matches_enumeration():
    lhs, rhs = brute_force(downward_walk_chain(complete_binary_tree(2), explicit=True), 2.0, 1)
    est = sst_downward_walk_exact(SSTProfile((2, 2, 0)), 2.0, 1)
    assert est.lhs == pytest.approx(lhs) and est.rhs == pytest.approx(rhs)


def test_degenerate_chain():
    ch = ChainSpec.explicit(["x"], [[1.0]], [1.0], coords=[[0.0]])
    est = estimate_convexity_mc(ch, 2.0, 2, 10, seed=0)
    assert est.degenerate and est.ratio is None
    with pytest.raises(PreconditionError):
        distortion_lower_bound(est)


def test_guards():
    with pytest.raises(InputError):
        ChainSpec.explicit([0, 1], [[0.5, 0.4], [0, 1]], [1, 0], coords=[[0], [1]])
    with pytest.raises(InputError):
        compute_convexity_exact(random_chain(np.random.default_rng(0), 2), 2.0, 20)
    with pytest.raises(ResourceError):
        downward_walk_chain(complete_binary_tree(12), explicit=True)
    with pytest.raises(PreconditionError):
        compute_convexity_exact(lamplighter_chain(4), 2.0, 2)


def test_chain_from_json():
    data = {"states": ["a", "b"], "kernel": [[0.5, 0.5], [0.5, 0.5]], "initial": [1, 0],
            "map": {"a": [0.0], "b": [1.0]}}
    est = compute_convexity_exact(ChainSpec.from_json(data), 2.0, 1)
    assert est.rhs == pytest.approx(1.0)
    with pytest.raises(InputError):
        ChainSpec.from_json({"states": ["a"]})


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 5), st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_dyadic_identity(m, dim, seed):
    X = np.random.default_rng(seed).normal(size=(2**m + 1, dim))
    r = dyadic_identity_residual(X)
    assert r.residual <= 1e-9
    assert r.shifted_lhs_bound_ok


def test_dyadic_identity_constant_sequence():
    r = dyadic_identity_residual(np.ones((5, 2)))
    assert r.lhs == 0 and r.residual == 0


def test_regular_tree_speed():
    # the walk on the 3-regular tree drifts away at rate 1/3
    s = walk_speed(regular_tree_walk_chain(3), 200, 300, seed=4)
    assert abs(s.speed_estimate - 1 / 3) < 5 * s.stderr + 0.02


def test_cycle_speed_small():
    s = walk_speed(cycle_walk_chain(64), 400, 100, seed=2)
    assert s.speed_estimate < 0.1
