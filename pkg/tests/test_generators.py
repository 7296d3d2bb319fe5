import math

import numpy as np
import pytest
from scipy import stats

from helpers import (all_saws, bp_diameters_mcmc, bp_diameters_rejection, kuiper_uniform,
                     saw3_chi2, saw3_counts)
from phshape.core import Polymer, PolymerKind, validate_polymer
from phshape.generators import (BpConfig, DlaConfig, SawConfig, gen_bp_mcmc, gen_bp_rejection,
                                gen_brownian_tree, gen_saw, gen_saw_walk, hastings_leaf_ratio,
                                is_self_avoiding, pivot_step, run_bp_chain, run_bp_moves,
                                saw_to_polymer)
from phshape.generators.branched import _place, _valid_bruteforce, bp_centers, straight_chain
from phshape.generators.dla import grow_cluster
from phshape.generators.saw import run_pivot_chain

# ------------------------------------------------------------------ SAW


def test_saw_one_edge():
    w = gen_saw_walk(SawConfig(1))
    assert w.tolist() == [[0, 0], [1, 0]]
    p = gen_saw(SawConfig(1))
    assert p.centers.tolist() == [[0, 0], [0.5, 0], [1, 0]] and p.ball_radius == 0.25


def test_saw_to_polymer_counts():
    walk = np.array([[0, 0], [1, 0], [1, 1], [0, 1]])
    p = saw_to_polymer(walk)
    assert p.n == 7
    assert len({tuple(c) for c in p.centers.tolist()}) == 7
    assert validate_polymer(p) == []


def test_pivot_step_examples():
    straight = np.array([[i, 0] for i in range(5)])
    bent = pivot_step(straight, 2, 1)
    assert bent.tolist() == [[0, 0], [1, 0], [2, 0], [2, 1], [2, 2]]
    assert (bent[:3] == straight[:3]).all()
    # U-turn walk: a quarter turn at the corner sends the last vertex onto (1, 0)
    u = np.array([[0, 0], [1, 0], [1, 1], [0, 1]])
    assert pivot_step(u, 2, 1) is None
    with pytest.raises(ValueError):
        pivot_step(straight, 2, 0)


def test_tree_chain_matches_reference_pivot():
    rng = np.random.default_rng(5)
    n = 60
    props = np.column_stack([rng.integers(0, n, 400), rng.integers(1, 8, 400)])
    walk = np.array([[i, 0] for i in range(n + 1)])
    accepted = 0
    for site, g in props:
        new = pivot_step(walk, int(site), int(g))
        if new is not None:
            walk, accepted = new, accepted + 1
    tree_walk, acc, att = run_pivot_chain(n, 10**9, proposals=props)
    assert att == len(props) and acc == accepted
    assert np.array_equal(tree_walk, walk - walk[0])


@pytest.mark.parametrize("n", [2, 50, 2000])
def test_saw_is_self_avoiding(n):
    w = gen_saw_walk(SawConfig(n, seed=n))
    assert len(w) == n + 1 and is_self_avoiding(w)
    assert validate_polymer(saw_to_polymer(w)) == []


def test_saw_length3_uniform():
    assert len(all_saws(3)) == 36
    counts = saw3_counts(20_000, seed0=10)
    assert len(counts) == 36
    assert saw3_chi2(counts) > 0.01


def test_saw_end_to_end_matches_enumeration():
    # stopping at an accepted pivot would favour extended walks; the fixed tail removes that
    walks = all_saws(8)
    exact = np.mean([w[-1][0] ** 2 + w[-1][1] ** 2 for w in walks])
    r2 = np.array([(gen_saw_walk(SawConfig(8, seed=s))[-1] ** 2).sum() for s in range(10_000)])
    assert abs(r2.mean() - exact) < 4 * r2.std() / math.sqrt(len(r2))


# ------------------------------------------------------------------ branched polymers


def test_rejection_small_cases():
    p = gen_bp_rejection(1, 3)
    assert p.n == 1
    p = gen_bp_rejection(2, 2, seed=3)
    assert np.linalg.norm(p.centers[1] - p.centers[0]) == pytest.approx(2)
    for s in range(20):
        assert validate_polymer(gen_bp_rejection(6, 3, seed=s)) == []


def test_path_tree_acceptance_two_thirds():
    edges = np.array([[0, 1], [1, 2]])
    rng = np.random.default_rng(0)
    th = rng.random((100_000, 2)) * 2 * np.pi
    ok = 0
    for a, b in th:
        dirs = np.array([[math.cos(a), math.sin(a)], [math.cos(b), math.sin(b)]])
        ok += _valid_bruteforce(_place(3, edges, dirs, 1.0), edges, 1.0)
    assert ok / len(th) == pytest.approx(2 / 3, abs=0.01)


@pytest.mark.parametrize("dim", [2, 3])
def test_mcmc_two_balls_direction_uniform(dim):
    d = np.array([run_bp_chain(BpConfig(2, dim, 1, seed=s))[1][0] for s in range(10_000)])
    assert np.allclose(np.linalg.norm(d, axis=1), 1)
    assert kuiper_uniform(np.arctan2(d[:, 1], d[:, 0])) > 0.01
    if dim == 3:
        # Archimedes: the height of a uniform point on the sphere is uniform
        assert stats.kstest(d[:, 2], "uniform", args=(-1, 2)).pvalue > 0.01


def test_hastings_ratio_hand_built():
    path = np.array([[0, 1], [1, 2], [2, 3]])
    star = np.array([[0, 1], [1, 2], [1, 3]])  # leaf 3 moved from 2 to 1

    def leaves(edges):
        return int((np.bincount(edges.ravel(), minlength=4) == 1).sum())

    assert (leaves(path), leaves(star)) == (2, 3)
    assert hastings_leaf_ratio(leaves(path), leaves(star)) == pytest.approx(2 / 3)
    assert hastings_leaf_ratio(leaves(star), leaves(path)) == 1.0
    # detailed balance for the pair: pi * q * a is symmetric (proposal q = 1/L * 1/(n-1))
    fwd = 1 / leaves(path) * hastings_leaf_ratio(leaves(path), leaves(star))
    back = 1 / leaves(star) * hastings_leaf_ratio(leaves(star), leaves(path))
    assert fwd == pytest.approx(back)


def _edge_set(edges):
    return {tuple(sorted(e)) for e in np.asarray(edges).tolist()}


@pytest.mark.parametrize("dim", [2, 3])
def test_moves_preserve_structure(dim):
    edges, dirs, _, _ = run_bp_chain(BpConfig(40, dim, 20, seed=dim))
    for step in range(300):
        # an even number of prior moves means the next one is kind (a)
        e1, d1, acc, _ = run_bp_moves(edges, dirs, 1, seed=step)
        assert _edge_set(e1) == _edge_set(edges)
        e2, d2, _, _ = run_bp_moves(e1, d1, 2, seed=step)
        # second move of that run is kind (b): at most one edge replaced
        assert len(_edge_set(e2) - _edge_set(e1)) <= 1
        p = Polymer(bp_centers(e2, d2), 1.0, PolymerKind.BRANCHED_POLYMER, 0, e2)
        assert validate_polymer(p) == []
        edges, dirs = e2, d2


@pytest.mark.parametrize("dim", [2, 3])
def test_mcmc_matches_rejection_small(dim):
    a = bp_diameters_mcmc(6, dim, 2000, seed0=100)
    b = bp_diameters_rejection(6, dim, 2000, seed0=100)
    assert stats.ks_2samp(a, b).pvalue > 0.01


def test_mcmc_large_chain_valid_and_moving():
    cfg = BpConfig(500, 3, 5, seed=1)
    edges, dirs, acc, tried = run_bp_chain(cfg)
    assert (acc > 0).all() and tried.sum() == 5 * 500
    p = gen_bp_mcmc(cfg)
    assert validate_polymer(p) == []
    assert np.array_equal(p.centers, bp_centers(edges, dirs))
    assert not np.array_equal(edges, straight_chain(500, 3)[0])


# ------------------------------------------------------------------ Brownian trees


def test_dla_two_balls_isotropic():
    ang = []
    for s in range(3000):
        pos = grow_cluster(DlaConfig(2, seed=s))[0]
        v = pos[1] - pos[0]
        assert np.linalg.norm(v) == pytest.approx(2, abs=1e-9)
        ang.append(math.atan2(v[1], v[0]))
    counts = np.histogram(ang, bins=12, range=(-math.pi, math.pi))[0]
    assert stats.chisquare(counts).pvalue > 0.01


@pytest.mark.parametrize("dim,n", [(2, 800), (3, 400)])
def test_dla_valid_tree(dim, n):
    p = gen_brownian_tree(DlaConfig(n, dim, seed=3))
    assert validate_polymer(p) == []
    assert len(p.adjacency) == n - 1
    d = np.linalg.norm(p.centers[p.adjacency[:, 0]] - p.centers[p.adjacency[:, 1]], axis=1)
    assert np.abs(d - 2).max() <= 1e-9


def test_config_validation():
    with pytest.raises(ValueError):
        DlaConfig(10, kill_factor=1.5)
    with pytest.raises(ValueError):
        BpConfig(10, ambient_dim=4)
    with pytest.raises(ValueError):
        SawConfig(0)


# ------------------------------------------------------------------ determinism


def test_generators_deterministic():
    for make in (lambda: gen_saw(SawConfig(300, seed=9)),
                 lambda: gen_bp_mcmc(BpConfig(200, 2, 3, seed=9)),
                 lambda: gen_bp_rejection(5, 3, seed=9),
                 lambda: gen_brownian_tree(DlaConfig(200, 2, seed=9))):
        a, b = make(), make()
        assert np.array_equal(a.centers, b.centers)
        assert np.array_equal(a.adjacency, b.adjacency)
    assert not np.array_equal(gen_saw(SawConfig(300, seed=1)).centers,
                              gen_saw(SawConfig(300, seed=2)).centers)
