import json
import math

import numpy as np
import pytest

from phshape.core import Diagram, ph_points
from phshape.oracles import (arc_diagram, arc_points, comb_set, cubical_diagram, grid_field,
                             match_diagrams, sierpinski_levels, sierpinski_points)
from phshape.pipeline import analyze_points


def test_arc_diagram_examples():
    for r, theta, point in ((1, math.pi / 2, (0.5, math.pi / 2)),
                            (1, math.pi / 3, (0.75, math.pi / 3)),
                            (2, math.pi / 3, (1.5, math.pi / 3))):
        p = ph_points(arc_diagram(r, theta))
        assert (p.sizes[0], p.aspects[0]) == pytest.approx(point)


def test_sierpinski_closed_forms():
    b0, d0 = sierpinski_levels(0.4, 0)
    assert b0 == pytest.approx(0.1)
    assert d0 == pytest.approx(math.sqrt(0.054933333333333), rel=1e-9)
    assert d0 == pytest.approx(0.234378, abs=1e-6)
    p = ph_points(Diagram([1], [b0], [d0]))
    assert p.sizes[0] == pytest.approx(0.167189, abs=1e-6)
    assert p.aspects[0] == pytest.approx(1.13, abs=0.005)
    _, d = sierpinski_points(0.5, 5)
    assert (ph_points(d, 1).aspects == math.pi / 2).all()
    _, d = sierpinski_points(0.4, 5)
    assert len(d.in_degree(1)[np.isclose(d.in_degree(1)[:, 0], sierpinski_levels(0.4, 2)[0])]) == 9
    with pytest.raises(ValueError):
        sierpinski_points(0.6, 3)


def test_sierpinski_sample_size():
    assert len(sierpinski_points(0.4, 7)[0]) == 3 ** 7
    assert len(sierpinski_points(0.5, 4)[0]) == 42  # shared corners merged


def test_comb_set():
    x, d = comb_set(0.5, 2, 3)
    pts = ph_points(d)
    assert sorted(zip(pts.sizes, pts.aspects)) == sorted(
        [(0.5, math.pi / 2)] * 2 + [(0.25, math.pi / 2)] * 4 + [(0.125, math.pi / 2)] * 8)
    # the sample itself realizes the diagram: merge times are half the gaps
    gaps = np.diff(x[:, 0])
    assert sorted(gaps / 2) == sorted(d.deaths)
    assert len(comb_set(0.5, 1, 4)[1]) == 4


def test_d_k_formula_against_cubical_oracle():
    pts, exact = sierpinski_points(0.4, 5)
    h = 0.001
    cub = cubical_diagram(pts, 0.0, h)
    for k in range(2):
        b, d = sierpinski_levels(0.4, k)
        iv = cub.in_degree(1)
        near = (np.abs(iv[:, 0] - b) <= h * math.sqrt(2)) & (np.abs(iv[:, 1] - d) <= h * math.sqrt(2))
        assert near.sum() == 3 ** k


def test_cubical_examples():
    d = cubical_diagram(np.array([[0.0, 0.0]]), 0.0, 0.05)
    assert len(d.in_degree(1)) == 0 and d.essential_count[0] == 1
    d = cubical_diagram(np.array([[0.0, 0.0], [2.0, 0.0]]), 0.0, 0.01)
    (b, e), = d.in_degree(0)
    assert b == 0 and e == pytest.approx(1.0, abs=0.01)


def test_cubical_circle_matches_pipeline():
    th = np.arange(200) * 2 * np.pi / 200
    circle = np.c_[np.cos(th), np.sin(th)]
    h = 0.005
    cub = cubical_diagram(circle, 0.0, h)
    (b, e), = [iv for iv in cub.in_degree(1) if iv[1] - iv[0] > 0.5]
    assert abs(b - math.sin(math.pi / 200)) <= 0.01 and abs(e - 1) <= 0.01
    assert match_diagrams(cub, analyze_points(circle).epsilon, h * math.sqrt(2))


def test_cubical_3d_matches_pipeline():
    pts = np.random.default_rng(3).random((10, 3))
    h = 0.01
    cub = cubical_diagram(pts, 0.05, h)
    assert match_diagrams(cub, analyze_points(pts, 0.05).epsilon, h * math.sqrt(3))


def test_refinement_convergence():
    theta = math.pi / 4
    pts = arc_points(1.0, theta, 60)
    ref = analyze_points(pts).epsilon.in_degree(1)
    errs = []
    for h in (0.04, 0.02, 0.01):
        iv = cubical_diagram(pts, 0.0, h).in_degree(1)
        main = iv[np.argmax(iv[:, 1] - iv[:, 0])]
        errs.append(np.abs(main - ref[np.argmax(ref[:, 1] - ref[:, 0])]).max())
    # first-order: halving h at least roughly halves the error (allow grid-phase noise)
    assert errs[2] <= errs[0] / 2
    assert all(e <= h * math.sqrt(2) / 2 + 1e-12 for e, h in zip(errs, (0.04, 0.02, 0.01)))


def test_grid_field_invariants_and_dump(tmp_path):
    pts = np.random.default_rng(0).random((5, 2))
    f = grid_field(pts, 0.1, 0.02)
    assert (f.values >= 0).all()
    for ax in range(2):
        assert np.abs(np.diff(f.values, axis=ax)).max() <= 0.02 * math.sqrt(2) + 1e-12
    f.dump(tmp_path / "g.bin")
    head = json.loads((tmp_path / "g.bin.json").read_text())
    back = np.fromfile(tmp_path / "g.bin", "<f8").reshape(head["shape"])
    assert np.array_equal(back, f.values)
    with pytest.raises(MemoryError):
        grid_field(pts * 100, 0.0, 0.001)


def test_match_diagrams_examples():
    a = Diagram([1, 1], [0.1, 0.2], [1.0, 0.9])
    assert match_diagrams(a, a, 0.0)
    tol = 0.01
    b = Diagram([1, 1], [0.1 + tol / 2, 0.2 - tol / 2], [1.0 - tol / 2, 0.9 + tol / 2])
    assert match_diagrams(a, b, tol)
    c = Diagram([1, 1, 1], [0.1, 0.2, 0.0], [1.0, 0.9, 5.0])
    rep = match_diagrams(a, c, tol)
    assert not rep and "(0, 5)" in rep.summary()
    short = Diagram([1, 1, 1], [0.1, 0.2, 0.3], [1.0, 0.9, 0.31])
    assert match_diagrams(a, short, tol)
