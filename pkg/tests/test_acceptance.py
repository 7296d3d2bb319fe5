"""Acceptance criteria AC1-AC10 at their stated tolerances.

Run with ``pytest tests/test_acceptance.py`` or ``python tests/test_acceptance.py``;
either way one PASS/FAIL line per criterion is printed at the end.
"""

import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from helpers import bp_diameters_mcmc, bp_diameters_rejection, saw3_chi2, saw3_counts
from phshape import experiments
from phshape.core import Polymer
from phshape.delaunay_alpha import alpha_filtration, delaunay
from phshape.generators import BpConfig, DlaConfig, gen_bp_mcmc, gen_brownian_tree
from phshape.oracles import cubical_diagram, match_diagrams
from phshape.persistence import betti_at, compute_persistence
from phshape.pipeline import analyze_polymer

pytestmark = pytest.mark.acceptance


def _report(ac_record, name, rep, budget=None):
    detail = "; ".join(c.line() for c in rep.checks)
    ok = rep.passed
    if budget is not None:
        ok = ok and rep.seconds < budget
        detail += f"; {rep.seconds:.1f} s (budget {budget:g} s)"
    ac_record(name, ok, detail)
    assert ok, detail


def test_ac1_arc(ac_record):
    _report(ac_record, "AC1", experiments.reproduce("arc"), budget=5)


def test_ac2_sierpinski(ac_record):
    _report(ac_record, "AC2", experiments.reproduce("sierpinski"), budget=30)


def _ac3_polymer(i: int) -> Polymer:
    n = int(np.random.default_rng(1000 + i).integers(2, 31))
    if i % 2 == 0:
        return gen_bp_mcmc(BpConfig(n, 2, 100, seed=i))
    return gen_brownian_tree(DlaConfig(n, 2, seed=i))


def test_ac3_cubical_equivalence(ac_record):
    t = time.perf_counter()
    failures, worst = [], 0.0
    for i in range(50):
        p = _ac3_polymer(i)
        h = 0.01 * p.ball_radius
        simplicial = analyze_polymer(p, alpha_max=math.inf).epsilon
        cubical = cubical_diagram(p.centers, p.ball_radius, h)
        rep = match_diagrams(cubical, simplicial, h * math.sqrt(2))
        worst = max(worst, rep.worst)
        if not rep:
            failures.append(f"polymer {i} ({p.n} balls): {rep.summary()}")
    secs = time.perf_counter() - t
    ok = not failures and secs < 600
    ac_record("AC3", ok, f"{50 - len(failures)}/50 matched at tol h*sqrt(2), worst displacement "
                         f"{worst:.4g}; {secs:.0f} s (budget 600 s)" + "".join("; " + f for f in failures))
    assert ok


def test_ac4_comb(ac_record):
    _report(ac_record, "AC4", experiments.reproduce("comb"))


def test_ac5_bp3d(ac_record):
    _report(ac_record, "AC5", experiments.reproduce("bp3d"), budget=3600)


def test_ac6_saw2d(ac_record):
    _report(ac_record, "AC6", experiments.reproduce("saw2d"), budget=3600)


def test_ac7_dla(ac_record):
    _report(ac_record, "AC7", experiments.reproduce("dla"))


def test_ac8_aspects(ac_record):
    _report(ac_record, "AC8", experiments.reproduce("aspects"))


def test_ac9_generators(ac_record):
    a = bp_diameters_mcmc(6, 2, 10_000, seed0=50_000)
    b = bp_diameters_rejection(6, 2, 10_000, seed0=50_000)
    p_ks = stats.ks_2samp(a, b).pvalue
    counts = saw3_counts(100_000, seed0=70_000)
    p_chi = saw3_chi2(counts)
    ok = p_ks > 0.01 and p_chi > 0.01 and len(counts) == 36
    ac_record("AC9", ok, f"n=6 2D diameter KS p={p_ks:.3f}; length-3 walks: {len(counts)} distinct, "
                         f"chi2 p={p_chi:.3f}")
    assert ok


def _betti_suite(trials=100):
    bad = 0
    for trial in range(trials):
        rng = np.random.default_rng(trial + 777)
        dim = 2 + trial % 2
        fc = alpha_filtration(delaunay(rng.random((int(rng.integers(5, 13)), dim)), seed=trial))
        d = compute_persistence(fc)
        for a in rng.random(20) * fc.values.max() * 1.1:
            expect = tuple(d.essential_count[k] + int(((d.degrees == k) & (d.births <= a)
                                                       & (a < d.deaths)).sum())
                           for k in range(dim + 1))
            bad += betti_at(fc, a) != expect
    return bad


def _cli_bytes(tmp: Path, tag: str) -> dict:
    # relative paths inside a fresh directory, so the recorded source path is the same too
    out = tmp / tag
    out.mkdir()
    run = [sys.executable, "-m", "phshape.cli"]
    for args in (["generate", "--kind", "dla", "--n", "300", "--seed", "11", "--out", "t.poly"],
                 ["analyze", "t.poly", "--out-dir", ".", "--dump-filtration"],
                 ["reproduce", "sierpinski", "--out-dir", "."]):
        subprocess.run(run + args, check=True, capture_output=True, cwd=out)
    return {f.name: f.read_bytes() for f in sorted(out.iterdir())}


def test_ac10_property_suites(ac_record, tmp_path):
    bad_betti = _betti_suite()
    complexes = [analyze_polymer(p).complex for p in (
        gen_bp_mcmc(BpConfig(400, 3, 5, seed=1)), gen_bp_mcmc(BpConfig(400, 2, 5, seed=1)),
        gen_brownian_tree(DlaConfig(400, 2, seed=1)), gen_brownian_tree(DlaConfig(400, 3, seed=1)),
        experiments.make_polymer(experiments.ExperimentConfig("saw", 400, 2, 1, (1,), 1), 1))]
    non_monotone = 0
    for fc in complexes:
        try:
            fc.check_monotone()
        except ValueError:
            non_monotone += 1
    a, b = _cli_bytes(tmp_path, "a"), _cli_bytes(tmp_path, "b")
    same = a.keys() == b.keys() and all(a[k] == b[k] for k in a)
    ok = bad_betti == 0 and non_monotone == 0 and same
    ac_record("AC10", ok, f"betti mismatches {bad_betti} over 100 filtrations x 20 levels; "
                          f"non-monotone complexes {non_monotone}/{len(complexes)}; "
                          f"repeated CLI runs byte-identical over {len(a)} files: {same}")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
