"""Command line interface: generate, analyze, fit, compare-aspects, reproduce."""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__, io
from .core import AspectWindow, PHPoints, validate_polymer

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_FAILED = 0, 2, 3, 4


class DataError(Exception):
    pass


class UsageError(Exception):
    pass


def _float_or_inf(s: str) -> float:
    return math.inf if s.lower() in ("inf", "none") else float(s)


def _degrees(s: str) -> list[int]:
    try:
        out = sorted({int(v) for v in s.split(",") if v.strip()})
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad degree list {s!r}")
    if not out or out[0] < 0:
        raise argparse.ArgumentTypeError(f"bad degree list {s!r}")
    return out


def cmd_generate(args) -> int:
    from .generators import (BpConfig, DlaConfig, SawConfig, gen_bp_mcmc, gen_bp_rejection,
                             gen_brownian_tree, gen_saw)
    if args.kind == "saw":
        if args.dim != 2:
            raise UsageError("self-avoiding walks are planar; use --dim 2")
        p = gen_saw(SawConfig(args.n, args.warmup, args.seed))
    elif args.kind == "bp":
        if args.rejection:
            p = gen_bp_rejection(args.n, args.dim, args.seed, args.max_attempts)
        else:
            p = gen_bp_mcmc(BpConfig(args.n, args.dim, args.sweeps, args.seed))
    else:
        p = gen_brownian_tree(DlaConfig(args.n, args.dim, args.launch_factor, args.kill_factor,
                                        args.seed, args.stick_tol))
    problems = validate_polymer(p)
    if problems:
        raise DataError("generated polymer is invalid: " + problems[0])
    io.write_polymer(p, args.out)
    print(f"wrote {p.n} balls of radius {p.ball_radius:g} to {args.out}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    from .pipeline import analyze_polymer
    p = io.read_polymer(args.polymer)
    m = p.ambient_dim
    bad = [k for k in args.degrees if k >= m]
    if bad:
        raise UsageError(f"degree {bad[0]} requested for {m}-dimensional input; need degree < {m}")
    problems = validate_polymer(p)
    if problems and not args.no_validate:
        raise DataError(f"{args.polymer}: " + problems[0])
    a = analyze_polymer(p, args.alpha_max, args.jitter)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    io.write_diagram(a.alpha, out / "diagram_alpha.csv")
    io.write_diagram(a.epsilon, out / "diagram_epsilon.csv")
    for k in args.degrees:
        path = out / f"points_deg{k}.csv"
        io.write_points(a.points(k), path)
        io.write_json(io.sidecar(path), {"degree": k, "r": p.ball_radius, "delta": a.delta,
                                         "samples": 1, "source": str(args.polymer)})
        print(f"degree {k}: {len(a.points(k))} P.H. points -> {path}")
    if args.dump_filtration:
        io.write_filtration(a.complex, out / "filtration.csv")
    return EXIT_OK


def _load_point_files(paths, degree):
    parts, metas = [], []
    for path in paths:
        parts.append(io.read_points(path).select(degree))
        side = io.sidecar(path)
        metas.append(json.loads(side.read_text()) if side.exists() else {})
    return parts, metas


def cmd_fit(args) -> int:
    from .analysis import auto_window, f_curve, self_similarity_test
    parts, metas = _load_point_files(args.points, args.degree)
    pts = PHPoints.concat(parts)
    r = args.r if args.r is not None else float(metas[0].get("r", 0.0))
    deltas = [m["delta"] for m in metas if "delta" in m]
    delta = args.delta if args.delta is not None else (float(np.median(deltas)) if deltas else None)
    samples = args.samples or sum(int(m.get("samples", 1)) for m in metas)
    window = AspectWindow(*args.aspect) if args.aspect else AspectWindow()
    fc = f_curve(pts, args.degree, window, samples, r, delta if delta is not None else math.inf)
    if args.window:
        lo, hi = args.window
    else:
        if delta is None:
            raise UsageError("no diameter known: pass --delta or --window")
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            lo, hi = auto_window(fc, r, delta)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    verdict = self_similarity_test(fc, (lo, hi), args.concavity_threshold, args.r2_threshold)
    report = verdict.fit.to_dict()
    report.update({"degree": args.degree, "samples": samples, "r": r, "delta": delta,
                   "aspect_window": [window.lo, window.hi], "verdict": verdict.verdict,
                   "concavity_threshold": args.concavity_threshold,
                   "r2_threshold": args.r2_threshold})
    io.write_json(args.out, report)
    if args.svg:
        from .plotting import plot_fcurve
        plot_fcurve(fc, verdict.fit, args.svg, f"degree {args.degree}")
    print(f"exponent {verdict.fit.exponent:.4f} over [{lo:.4g}, {hi:.4g}], R^2 {verdict.r2:.4f}, "
          f"concavity {verdict.concavity:.4f}: {verdict.verdict}")
    return EXIT_OK


def cmd_compare_aspects(args) -> int:
    from .analysis import aspect_ratio_chart
    a = PHPoints.concat(_load_point_files([args.a], args.degree)[0])
    b = PHPoints.concat(_load_point_files([args.b], args.degree)[0])
    if len(a) == 0 or len(b) == 0:
        raise DataError("both point files need points of degree %d" % args.degree)
    chart = aspect_ratio_chart(a, b)
    io.write_aspect_chart(chart, args.out)
    if args.svg:
        from .plotting import plot_aspect_chart
        plot_aspect_chart(chart, args.svg)
    for lo, hi, fa, fb, ratio in chart.rows():
        print(f"[{lo:.2f}, {hi:.2f}]  {ratio:.4f}")
    return EXIT_OK


def cmd_reproduce(args) -> int:
    from .experiments import REGISTRY, reproduce
    if args.name not in REGISTRY:
        raise UsageError(f"unknown experiment {args.name!r}; choose from {', '.join(REGISTRY)}")
    rep = reproduce(args.name, Path(args.out_dir) if args.out_dir else None)
    for c in rep.checks:
        print(c.line())
    print(f"{args.name}: {'PASS' if rep.passed else 'FAIL'} ({rep.seconds:.1f} s)")
    return EXIT_OK if rep.passed else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phshape", description=__doc__)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample a random polymer")
    g.add_argument("--kind", choices=["bp", "dla", "saw"], required=True)
    g.add_argument("--n", type=int, required=True, help="balls (bp, dla) or lattice edges (saw)")
    g.add_argument("--dim", type=int, choices=[2, 3], default=2)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--sweeps", type=int, default=1000, help="bp: MCMC sweeps of n moves")
    g.add_argument("--rejection", action="store_true", help="bp: exact rejection sampler")
    g.add_argument("--max-attempts", type=int, default=10_000_000)
    g.add_argument("--warmup", type=int, default=None, help="saw: accepted pivots (default 10n)")
    g.add_argument("--launch-factor", type=float, default=2.0)
    g.add_argument("--kill-factor", type=float, default=10.0)
    g.add_argument("--stick-tol", type=float, default=1e-6)
    g.set_defaults(func=cmd_generate)

    a = sub.add_parser("analyze", help="persistence diagram and P.H. points of a polymer file")
    a.add_argument("polymer")
    a.add_argument("--out-dir", default=".")
    a.add_argument("--degrees", type=_degrees, default=[1])
    a.add_argument("--alpha-max", type=_float_or_inf, default=None,
                   help="filtration cut; default the diameter, 'inf' for none")
    a.add_argument("--jitter", type=float, default=1e-9)
    a.add_argument("--dump-filtration", action="store_true")
    a.add_argument("--no-validate", action="store_true")
    a.set_defaults(func=cmd_analyze)

    f = sub.add_parser("fit", help="P.H. dimension from pooled point files")
    f.add_argument("points", nargs="+")
    f.add_argument("--degree", type=int, default=1)
    f.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"))
    f.add_argument("--aspect", type=float, nargs=2, metavar=("LO", "HI"))
    f.add_argument("--r", type=float)
    f.add_argument("--delta", type=float)
    f.add_argument("--samples", type=int)
    f.add_argument("--concavity-threshold", type=float, default=0.05)
    f.add_argument("--r2-threshold", type=float, default=0.98)
    f.add_argument("--out", default="fit.json")
    f.add_argument("--svg")
    f.set_defaults(func=cmd_fit)

    c = sub.add_parser("compare-aspects", help="per-bin aspect proportion ratios of a over b")
    c.add_argument("a")
    c.add_argument("b")
    c.add_argument("--degree", type=int, default=1)
    c.add_argument("--out", default="aspects.csv")
    c.add_argument("--svg")
    c.set_defaults(func=cmd_compare_aspects)

    r = sub.add_parser("reproduce", help="run a registered experiment")
    r.add_argument("name")
    r.add_argument("--out-dir")
    r.set_defaults(func=cmd_reproduce)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"phshape: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, io.FormatError, FileNotFoundError, ValueError) as exc:
        print(f"phshape: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
