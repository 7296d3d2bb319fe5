import json
import math

import numpy as np
import pytest

from phshape import io
from phshape.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main
from phshape.core import Convention, Diagram, PHPoints, Polymer, PolymerKind, ph_points, validate_polymer
from phshape.oracles import comb_set


def _circle_file(path, n=200):
    th = np.arange(n) * 2 * np.pi / n
    io.write_polymer(Polymer(np.c_[np.cos(th), np.sin(th)], 0.0), path)
    return path


# ------------------------------------------------------------------ file formats


def test_polymer_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    p = Polymer(rng.random((7, 3)) * 1e3 + 1 / 3, 0.25, PolymerKind.BROWNIAN_TREE, 42,
                [[i, i + 1] for i in range(6)])
    io.write_polymer(p, tmp_path / "a.poly")
    q = io.read_polymer(tmp_path / "a.poly")
    assert np.array_equal(p.centers, q.centers) and np.array_equal(p.adjacency, q.adjacency)
    assert (q.ball_radius, q.kind, q.seed) == (0.25, PolymerKind.BROWNIAN_TREE, 42)
    io.write_polymer(q, tmp_path / "b.poly")
    assert (tmp_path / "a.poly").read_bytes() == (tmp_path / "b.poly").read_bytes()


def test_bad_polymer_file(tmp_path):
    (tmp_path / "x.poly").write_text("not a header\n1,2\n")
    with pytest.raises(io.FormatError):
        io.read_polymer(tmp_path / "x.poly")
    assert main(["analyze", str(tmp_path / "x.poly"), "--out-dir", str(tmp_path)]) == EXIT_DATA
    assert main(["analyze", str(tmp_path / "missing.poly")]) == EXIT_DATA


def test_diagram_and_points_round_trip(tmp_path):
    d = Diagram([0, 1, 1], [0.0, 0.1, 1 / 3], [0.5, math.pi, 2.0], Convention.EPSILON, 0.5, (1, 0),
                [False, True, False])
    io.write_diagram(d, tmp_path / "d.csv")
    e = io.read_diagram(tmp_path / "d.csv")
    assert np.array_equal(e.births, d.births) and np.array_equal(e.deaths, d.deaths)
    assert e.convention == d.convention and e.radius == d.radius
    assert tuple(e.essential_count) == (1, 0) and list(e.truncated) == [False, True, False]
    pts = ph_points(d)
    io.write_points(pts, tmp_path / "p.csv")
    back = io.read_points(tmp_path / "p.csv")
    assert np.array_equal(back.sizes, pts.sizes) and np.array_equal(back.aspects, pts.aspects)


# ------------------------------------------------------------------ generate


def test_generate_saw(tmp_path):
    out = tmp_path / "w.poly"
    assert main(["generate", "--kind", "saw", "--n", "1000", "--seed", "7", "--out", str(out)]) == 0
    assert io.read_polymer(out).n == 2001


def test_generate_bp_valid(tmp_path):
    out = tmp_path / "b.poly"
    args = ["generate", "--kind", "bp", "--dim", "3", "--n", "100", "--sweeps", "200", "--seed", "1",
            "--out", str(out)]
    assert main(args) == EXIT_OK
    p = io.read_polymer(out)
    assert p.n == 100 and validate_polymer(p) == []


def test_generate_usage_errors(tmp_path):
    assert main(["generate", "--kind", "saw", "--out", str(tmp_path / "x")]) == EXIT_USAGE
    assert main(["generate", "--kind", "saw", "--n", "5", "--dim", "3",
                 "--out", str(tmp_path / "x")]) == EXIT_USAGE
    assert main(["generate", "--kind", "dla", "--n", "5", "--kill-factor", "1.5",
                 "--out", str(tmp_path / "x")]) == EXIT_DATA
    assert main(["nonsense"]) == EXIT_USAGE


def test_generate_deterministic_bytes(tmp_path):
    for kind in ("saw", "bp", "dla"):
        outs = []
        for k in range(2):
            out = tmp_path / f"{kind}{k}.poly"
            main(["generate", "--kind", kind, "--n", "150", "--seed", "3", "--sweeps", "5",
                  "--out", str(out)])
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]


# ------------------------------------------------------------------ analyze


def test_analyze_circle(tmp_path):
    poly = _circle_file(tmp_path / "c.poly")
    assert main(["analyze", str(poly), "--out-dir", str(tmp_path / "o")]) == EXIT_OK
    pts = io.read_points(tmp_path / "o" / "points_deg1.csv")
    assert len(pts) == 1
    b, d = math.sin(math.pi / 200), 1.0
    ref = ph_points(Diagram([1], [b], [d]))
    assert pts.sizes[0] == pytest.approx(ref.sizes[0], abs=1e-3)
    assert pts.aspects[0] == pytest.approx(ref.aspects[0], abs=1e-3)
    eps = io.read_diagram(tmp_path / "o" / "diagram_epsilon.csv")
    alpha = io.read_diagram(tmp_path / "o" / "diagram_alpha.csv")
    assert eps.convention == Convention.EPSILON and alpha.convention == Convention.ALPHA
    side = json.loads(io.sidecar(tmp_path / "o" / "points_deg1.csv").read_text())
    assert side["degree"] == 1 and side["samples"] == 1


def test_analyze_degrees(tmp_path):
    poly = tmp_path / "b.poly"
    main(["generate", "--kind", "bp", "--dim", "3", "--n", "60", "--sweeps", "20", "--out", str(poly)])
    assert main(["analyze", str(poly), "--degrees", "1,2", "--out-dir", str(tmp_path / "o"),
                 "--dump-filtration"]) == EXIT_OK
    assert (tmp_path / "o" / "points_deg1.csv").exists()
    assert (tmp_path / "o" / "points_deg2.csv").exists()
    assert (tmp_path / "o" / "filtration.csv").exists()
    flat = _circle_file(tmp_path / "c.poly", 20)
    assert main(["analyze", str(flat), "--degrees", "2", "--out-dir", str(tmp_path)]) == EXIT_USAGE


def test_analyze_deterministic_bytes(tmp_path):
    poly = tmp_path / "s.poly"
    main(["generate", "--kind", "saw", "--n", "200", "--seed", "2", "--out", str(poly)])
    for k in range(2):
        main(["analyze", str(poly), "--out-dir", str(tmp_path / f"o{k}")])
    for name in ("diagram_alpha.csv", "diagram_epsilon.csv", "points_deg1.csv"):
        assert (tmp_path / "o0" / name).read_bytes() == (tmp_path / "o1" / name).read_bytes()


# ------------------------------------------------------------------ fit and compare


def _points_file(path, sizes, aspects=None, degree=1, meta=None):
    sizes = np.asarray(sizes, float)
    aspects = np.full(len(sizes), 1.0) if aspects is None else np.asarray(aspects, float)
    io.write_points(PHPoints(np.full(len(sizes), degree), sizes, aspects), path)
    if meta:
        io.write_json(io.sidecar(path), meta)
    return path


def test_fit_comb_fixture(tmp_path):
    pts = ph_points(comb_set(0.5, 3, 12)[1])
    path = tmp_path / "comb.csv"
    io.write_points(PHPoints(np.ones(len(pts), int), pts.sizes, pts.aspects), path)
    out = tmp_path / "fit.json"
    assert main(["fit", str(path), "--window", str(0.5**10), str(0.5**2), "--out", str(out),
                 "--svg", str(tmp_path / "fit.svg")]) == EXIT_OK
    rep = json.loads(out.read_text())
    assert rep["exponent"] == pytest.approx(math.log(3) / math.log(2), abs=0.02)
    assert (tmp_path / "fit.svg").read_text().lstrip().startswith("<?xml")


def test_fit_power_law_and_auto_window(tmp_path):
    # sizes j^(-1/2) scaled: F(x) = floor((c/x)^2), a power law of exponent 2 up to rounding
    sizes = 1000 * np.arange(1, 200_001) ** -0.5
    path = _points_file(tmp_path / "p.csv", sizes, meta={"degree": 1, "r": 1.0, "delta": 1000.0,
                                                         "samples": 1})
    out = tmp_path / "fit.json"
    assert main(["fit", str(path), "--out", str(out)]) == EXIT_OK
    rep = json.loads(out.read_text())
    assert rep["window"] == [4.0, 250.0]
    # step-function rounding near the top of the window costs a few thousandths
    assert rep["exponent"] == pytest.approx(2.0, abs=0.01) and rep["verdict"] == "consistent"
    assert main(["fit", str(path), "--window", "5000", "6000", "--out", str(out)]) == EXIT_DATA


def test_fit_bowed_fixture_inconsistent(tmp_path):
    x = np.geomspace(1, 10, 20000)
    counts = np.floor(50 * np.exp(-np.log(x) ** 2) / np.exp(-np.log(10) ** 2)).astype(int)
    sizes = np.repeat(x, -np.diff(np.r_[counts, 0]))
    path = _points_file(tmp_path / "b.csv", sizes)
    out = tmp_path / "fit.json"
    assert main(["fit", str(path), "--window", "1.1", "8", "--out", str(out)]) == EXIT_OK
    rep = json.loads(out.read_text())
    assert rep["verdict"] == "inconsistent" and rep["concavity"] < 0


def test_fit_without_delta_is_usage_error(tmp_path):
    path = _points_file(tmp_path / "p.csv", np.arange(1.0, 50.0))
    assert main(["fit", str(path), "--out", str(tmp_path / "f.json")]) == EXIT_USAGE


def test_compare_aspects(tmp_path):
    rng = np.random.default_rng(0)
    a = _points_file(tmp_path / "a.csv", np.ones(300), rng.random(300) * math.pi / 2)
    out = tmp_path / "chart.csv"
    assert main(["compare-aspects", str(a), str(a), "--out", str(out),
                 "--svg", str(tmp_path / "c.svg")]) == EXIT_OK
    ratios = np.loadtxt(out, delimiter=",", skiprows=1)[:, -1]
    assert np.allclose(ratios, 1)
    hi = _points_file(tmp_path / "hi.csv", np.ones(5), np.full(5, 1.5))
    lo = _points_file(tmp_path / "lo.csv", np.ones(5), np.full(5, 0.1))
    assert main(["compare-aspects", str(hi), str(lo), "--out", str(out)]) == EXIT_OK
    ratios = np.genfromtxt(out, delimiter=",", skip_header=1)[:, -1]
    assert ratios[0] == 0 and np.isnan(ratios[-1])
    empty = _points_file(tmp_path / "e.csv", [])
    assert main(["compare-aspects", str(hi), str(empty), "--out", str(out)]) == EXIT_DATA


# ------------------------------------------------------------------ reproduce


def test_reproduce_unknown():
    assert main(["reproduce", "nope"]) == EXIT_USAGE


@pytest.mark.parametrize("name", ["arc", "sierpinski", "comb"])
def test_reproduce_oracles_pass_and_are_deterministic(name, tmp_path):
    assert main(["reproduce", name, "--out-dir", str(tmp_path / "a")]) == EXIT_OK
    assert main(["reproduce", name, "--out-dir", str(tmp_path / "b")]) == EXIT_OK
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert f"{name}_report.json" in files
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
