"""Command-line surface.

Subcommands:
  curve        inspect a curve: points, group order, per-point order/cofactor
  switch-eval  evaluate the switching map on one measurement
  sweep        sensitivity sweep histograms (CSV per reference, optional SVG)
  voronoi      nearest-seed partition of [0,s)^2 on a sampling grid
  sim          run a closed-loop scenario file, write trace and summary
  demo         copy the packaged demo config and scenarios somewhere editable

Exit codes: 0 success, 2 configuration error, 3 simulation divergence,
4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .analysis import SweepSpec, sensitivity_sweep, voronoi_rows
from .curve import Curve
from .errors import ConfigError, DivergenceError, EcwmError
from .sim import Scenario, calibrate_threshold, run_scenario
from .switching import SwitchingConfig, sigma_detail, validate_theta
from . import shipped, svgplot

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3
EXIT_IO = 4


def _point_json(p):
    return None if p.is_infinity else [p.x, p.y]


def cmd_curve(args) -> int:
    curve = Curve(args.a, args.b, args.s)
    affine = curve.affine_points()
    if args.json:
        payload = {
            "s": curve.s, "a": curve.a, "b": curve.b,
            "order": curve.order(),
            "identity": {"order": 1, "cofactor": curve.order()},
            "points": [
                {"x": p.x, "y": p.y, "order": curve.point_order(p),
                 "cofactor": curve.cofactor(p)}
                for p in affine
            ],
        }
        print(json.dumps(payload, indent=2))
        return EXIT_OK
    print(f"curve y^2 = x^3 + {curve.a}x + {curve.b} over F_{curve.s}")
    print(f"group order {curve.order()} ({len(affine)} affine points + identity)")
    print(f"{'point':>12}  {'order':>5}  {'cofactor':>8}")
    print(f"{'O':>12}  {1:>5}  {curve.order():>8}")
    for p in affine:
        print(f"{str(p):>12}  {curve.point_order(p):>5}  {curve.cofactor(p):>8}")
    return EXIT_OK


def cmd_switch_eval(args) -> int:
    cfg = SwitchingConfig.load(args.config)
    outcome = sigma_detail(args.y, cfg)
    report = validate_theta(outcome.theta)
    print(json.dumps({
        "y": args.y,
        "scaled": list(outcome.scaled),
        "P": _point_json(outcome.generator_point),
        "S": _point_json(outcome.secret_multiple),
        "fallback": outcome.fallback_used,
        "b_raw": list(outcome.raw_taps),
        "theta": list(outcome.theta.taps),
        "valid": report.ok,
        "violation": report.violation,
    }, indent=2))
    return EXIT_OK


def _ref_label(r: float) -> str:
    return str(int(r)) if float(r).is_integer() else repr(r)


def cmd_sweep(args) -> int:
    cfg = SwitchingConfig.load(args.config)
    refs = tuple(float(v) for v in args.refs.split(","))
    spec = SweepSpec(references=refs, n_realizations=args.n,
                     noise_halfwidth=args.halfwidth, seed=args.seed)
    results = sensitivity_sweep(cfg, spec)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    affine = cfg.curve.affine_points()
    uniform = 1.0 / len(affine)
    summary = {"seed": args.seed, "n_realizations": args.n,
               "noise_halfwidth": args.halfwidth,
               "uniform_rel_freq": uniform, "references": {}}
    for res in results:
        label = _ref_label(res.reference)
        path = outdir / f"sweep_r{label}.csv"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("point_x,point_y,count,rel_freq\n")
            for p in affine:
                c = res.counts.get(p, 0)
                fh.write(f"{p.x},{p.y},{c},{c / res.n_realizations!r}\n")
        summary["references"][label] = {
            "entropy": res.entropy,
            "distinct_points": len(res.reached),
            "csv": path.name,
        }
        if args.svg:
            svgplot.histogram_svg(
                outdir / f"sweep_r{label}.svg",
                [str(p) for p in affine],
                [res.rel_freq(p) for p in affine],
                reference_line=uniform,
                title=f"hit frequency around reference {label}",
            )
    with open(outdir / "sweep_summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    print(f"wrote {len(results)} sweep files to {outdir}")
    return EXIT_OK


def cmd_voronoi(args) -> int:
    curve = Curve(args.a, args.b, args.s)
    rows = list(voronoi_rows(curve, args.grid))
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "voronoi.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("gx,gy,seed_x,seed_y\n")
        for gx, gy, owner in rows:
            fh.write(f"{gx!r},{gy!r},{owner.x},{owner.y}\n")
    if args.svg:
        svgplot.voronoi_svg(outdir / "voronoi.svg", curve.s, rows,
                            title=f"nearest-seed partition, F_{curve.s}")
    print(f"wrote {len(rows)} cell assignments to {path}")
    return EXIT_OK


def cmd_sim(args) -> int:
    scenario = Scenario.load(args.scenario)
    if scenario.detector.threshold.mode == "calibrate":
        thr = calibrate_threshold(scenario.without_attack())
    else:
        thr = scenario.detector.threshold.value
    trace = run_scenario(scenario, seed=args.seed, threshold=thr)
    paths = trace.write_outputs(args.out)
    summary = trace.summary()
    print(json.dumps({
        "threshold": thr,
        "n_alarms": summary["n_alarms"],
        "first_alarm": summary["first_alarm"],
        "switches": len(summary["switch_steps"]),
        "max_reconstruction_error": summary["max_reconstruction_error"],
        "outputs": paths,
    }, indent=2))
    return EXIT_OK


def cmd_demo(args) -> int:
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    for name in shipped.data_names():
        (outdir / name).write_text(shipped.data_text(name), encoding="utf-8")
        print(f"wrote {outdir / name}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ecwm",
        description="Curve-keyed switching watermark toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curve", help="inspect a curve's group structure")
    p.add_argument("--s", type=int, required=True, help="field prime")
    p.add_argument("--a", type=int, required=True, help="x coefficient")
    p.add_argument("--b", type=int, required=True, help="constant coefficient")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("switch-eval", help="evaluate the switching map once")
    p.add_argument("--config", required=True, help="shared-secret JSON file")
    p.add_argument("--y", type=float, required=True, help="previous output sample")
    p.set_defaults(func=cmd_switch_eval)

    p = sub.add_parser("sweep", help="sensitivity sweep histograms")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--refs", default="0,1,10,100", help="comma-separated references")
    p.add_argument("--n", type=int, default=500, help="realizations per reference")
    p.add_argument("--halfwidth", type=float, default=0.05, help="noise halfwidth")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--svg", action="store_true", help="also render SVG figures")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("voronoi", help="nearest-seed partition export")
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--grid", type=int, default=170, help="grid resolution per axis")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--svg", action="store_true")
    p.set_defaults(func=cmd_voronoi)

    p = sub.add_parser("sim", help="run a closed-loop scenario")
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None,
                   help="override the run seed (calibration keeps the file seed)")
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("demo", help="copy packaged demo files")
    p.add_argument("--out", default=".", help="destination directory")
    p.set_defaults(func=cmd_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as exc:
        print(f"simulation diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except EcwmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
