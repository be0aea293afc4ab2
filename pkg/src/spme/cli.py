"""Command-line entry point.

    spme run CONFIG OUT_DIR
    spme asymptotics CONFIG OUT_DIR [--decades N] [--factor F]
    spme plot CSV OUT.svg --x t --columns a,b [--loglog]
    spme selftest [--only 1,2,...]
    spme bench CONFIG [--steps N]

CONFIG is a preset name or a path to a config file. Exit codes are listed in
``EXIT_*`` below.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import config, experiments, plotting, selftest
from .initial import RecipeError
from .solver import BoundaryHitError, InstabilityError

EXIT_OK = 0
EXIT_SELFTEST_FAILED = 1
EXIT_CONFIG = 2
EXIT_BOUNDARY = 3
EXIT_INSTABILITY = 4
EXIT_DATA = 5


def _fmt(x) -> str:
    return experiments.fmt(x)


def cmd_run(args) -> int:
    exp = config.load(args.config)
    res = experiments.run_experiment(exp, args.out, workers=args.threads)
    if res.trajectory is None:
        print(f"no snapshots requested; wrote {res.out_dir / 'manifest.json'}")
        return EXIT_OK
    traj = res.trajectory
    print(f"{exp.run.name}: {traj.step_count} steps to t={_fmt(traj.final.t)}")
    last = res.series.rows[-1]
    for key in ("mass_total", "scaled_max_total", "l1_err_vs_exact"):
        print(f"  {key} = {_fmt(last[key])}")
    print(f"wrote {res.out_dir}")
    return EXIT_OK


def cmd_asymptotics(args) -> int:
    exp = config.load(args.config)
    if args.factor is not None:
        exp.factor = args.factor
    decades = args.decades if args.decades is not None else exp.decades
    if decades < 2:
        raise config.ConfigError("asymptotics needs --decades >= 2")
    report = experiments.asymptotics(
        exp, decades=decades, workers=args.threads,
        on_decade=lambda r: print(f"decade {r.decade}: t={_fmt(r.t)} steps={r.steps}", file=sys.stderr),
    )
    print(report.table())
    print(f"concavity target {_fmt(report.concavity_target)}")
    if args.out:
        path = experiments.write_asymptotics(exp, report, args.out)
        print(f"wrote {path}")
    return EXIT_OK


def cmd_plot(args) -> int:
    try:
        data = experiments.read_csv(args.csv)
    except (OSError, ValueError, StopIteration) as exc:
        print(f"error: cannot read {args.csv}: {exc}", file=sys.stderr)
        return EXIT_DATA
    cols = [c.strip() for c in args.columns.split(",") if c.strip()]
    try:
        path = plotting.line_chart(data, args.x, cols, args.out, loglog=args.loglog, title=args.title)
    except plotting.MissingColumnError as exc:
        print(f"error: {exc.args[0]}; available: {', '.join(data)}", file=sys.stderr)
        return EXIT_DATA
    print(f"wrote {path}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    keys = None
    if args.only:
        keys = {int(k) for k in args.only.split(",")}
    results = selftest.run_all(keys, selftest.Suite(workers=args.threads))
    return EXIT_OK if all(r.passed for r in results) else EXIT_SELFTEST_FAILED


def cmd_bench(args) -> int:
    exp = config.load(args.config)
    rows = experiments.bench(exp, steps=args.steps, workers=args.threads)
    print("face_average,steps,seconds_per_step,t_reached,support_cells")
    for r in rows:
        print(",".join([r["face_average"], str(r["steps"]), _fmt(r["seconds_per_step"]),
                        _fmt(r["t_reached"]), str(r["support_cells"])]))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spme", description="Coupled porous-medium system simulator.")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads for the step kernel (default: SPME_THREADS or 1)")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a config and write snapshots, diagnostics and a manifest")
    r.add_argument("config", help=f"preset ({', '.join(config.PRESETS)}) or config file")
    r.add_argument("out", help="output directory")
    r.set_defaults(func=cmd_run)

    a = sub.add_parser("asymptotics", help="decay table over rescaled decades")
    a.add_argument("config", nargs="?", default="asymptotics")
    a.add_argument("out", nargs="?", default=None)
    a.add_argument("--decades", type=int, default=None)
    a.add_argument("--factor", type=float, default=None)
    a.set_defaults(func=cmd_asymptotics)

    pl = sub.add_parser("plot", help="SVG line chart of CSV columns")
    pl.add_argument("csv")
    pl.add_argument("out")
    pl.add_argument("--x", default="t")
    pl.add_argument("--columns", required=True, help="comma-separated column names")
    pl.add_argument("--loglog", action="store_true")
    pl.add_argument("--title", default=None)
    pl.set_defaults(func=cmd_plot)

    s = sub.add_parser("selftest", help="run the acceptance checks")
    s.add_argument("--only", default=None, help="comma-separated check numbers")
    s.set_defaults(func=cmd_selftest)

    b = sub.add_parser("bench", help="time the face-averaging variants")
    b.add_argument("config", nargs="?", default="two-species-split")
    b.add_argument("--steps", type=int, default=2000)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (config.ConfigError, RecipeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BoundaryHitError as exc:
        print(f"boundary hit: {exc}", file=sys.stderr)
        return EXIT_BOUNDARY
    except InstabilityError as exc:
        print(f"instability: {exc}", file=sys.stderr)
        return EXIT_INSTABILITY


if __name__ == "__main__":
    sys.exit(main())
