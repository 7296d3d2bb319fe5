"""Samplers and statistics shared by the generator tests and the acceptance run."""

import math
from collections import Counter

import numpy as np
from scipy import stats

from phshape.core import max_pairwise_distance
from phshape.generators import BpConfig, SawConfig, gen_bp_rejection, gen_saw_walk, run_bp_chain
from phshape.generators.branched import bp_centers


def kuiper_uniform(angles) -> float:
    """p-value of Kuiper's test that angles (radians) are uniform on the circle."""
    u = np.sort(np.mod(angles, 2 * math.pi) / (2 * math.pi))
    n = len(u)
    i = np.arange(1, n + 1)
    v = (i / n - u).max() + (u - (i - 1) / n).max()
    lam = (math.sqrt(n) + 0.155 + 0.24 / math.sqrt(n)) * v
    j = np.arange(1, 101)
    return float(np.clip(2 * ((4 * j**2 * lam**2 - 1) * np.exp(-2 * j**2 * lam**2)).sum(), 0, 1))


def bp_diameters_mcmc(n, dim, samples, sweeps=100, seed0=0):
    out = np.empty(samples)
    for s in range(samples):
        e, d, _, _ = run_bp_chain(BpConfig(n, dim, sweeps, seed0 + s))
        out[s] = max_pairwise_distance(bp_centers(e, d)) + 2
    return out


def bp_diameters_rejection(n, dim, samples, seed0=0):
    return np.array([max_pairwise_distance(gen_bp_rejection(n, dim, seed0 + s).centers) + 2
                     for s in range(samples)])


def saw3_counts(samples, seed0=0) -> Counter:
    return Counter(tuple(map(tuple, gen_saw_walk(SawConfig(3, seed=seed0 + s)).tolist()))
                   for s in range(samples))


def all_saws(n):
    walks = [[(0, 0)]]
    for _ in range(n):
        walks = [w + [(w[-1][0] + dx, w[-1][1] + dy)] for w in walks
                 for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1))
                 if (w[-1][0] + dx, w[-1][1] + dy) not in w]
    return [tuple(w) for w in walks]


def saw3_chi2(counts: Counter) -> float:
    walks = all_saws(3)
    assert set(counts) <= set(walks)
    return float(stats.chisquare([counts.get(w, 0) for w in walks]).pvalue)
