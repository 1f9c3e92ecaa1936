"""Command-line entry point: ``sim run|sweep|lab|plot|validate``."""

import argparse
import sys

from .config import load_config, parse_lab, parse_sweep
from .errors import ConfigError
from .harness import EXIT_ERROR, run_lab, run_scenario, run_sweep


def _read(path):
    with open(path) as fh:
        return fh.read()


def cmd_run(args):
    cfg = load_config(args.config)
    res = run_scenario(cfg, args.output)
    if res.summary:
        t = res.summary
        print(f"{t['termination']} at t = {t['final_t']:.6g}, sup u = {t['final_sup_u']:.6g} -> {res.directory}")
    return res.status


def cmd_sweep(args):
    sweep = parse_sweep(_read(args.config))
    rows = run_sweep(sweep, args.output, args.parallelism)
    for row in rows:
        print(row["index"], row["termination"], row.get("final_sup_u"))
    return 0 if all(r["termination"] != "error" for r in rows) else EXIT_ERROR


def cmd_lab(args):
    summary = run_lab(parse_lab(_read(args.config)), args.output)
    for key, val in summary.items():
        print(f"{key} = {val!r}")
    return 0


def cmd_plot(args):
    from .plotting import emit_plots
    for path in emit_plots(args.run_dir):
        print(path)
    return 0


def cmd_validate(args):
    cfg = load_config(args.config)
    for w in cfg.warnings:
        print(f"warning: {w}")
    print(f"ok: k = {list(cfg.ks)}, p = {list(cfg.ps)}, tau = {cfg.tau:g}")
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="sim", description="chemotaxis-logistic simulator")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run one scenario")
    p.add_argument("config")
    p.add_argument("-o", "--output", help="output directory (overrides the config)")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("sweep", help="run a parameter sweep")
    p.add_argument("config")
    p.add_argument("-o", "--output")
    p.add_argument("-j", "--parallelism", type=int)
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("lab", help="run the inequality lab")
    p.add_argument("config")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_lab)
    p = sub.add_parser("plot", help="plot a finished run directory")
    p.add_argument("run_dir")
    p.set_defaults(func=cmd_plot)
    p = sub.add_parser("validate", help="check a scenario config")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print("configuration errors:", file=sys.stderr)
        for e in exc.errors:
            print(f"  {e}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
