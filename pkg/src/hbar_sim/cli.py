"""``hbar-sim`` command line.

    hbar-sim <subcommand> --config PATH [--set key=value]... [--out DIR]

Exit status: 0 when every check of the subcommand passes, 2 when a physics
check fails (for example numeric and closed-form P_exc differ by more than
``checks.max_rel_diff``), 1 for usage, configuration or I/O errors.
"""
from __future__ import annotations

import argparse
import sys

from . import __version__
from .config import default_scenario_text, load_config, parse_config
from .errors import ConfigError
from .runner import emit_outputs, run_scenario

EXIT_OK, EXIT_USAGE, EXIT_PHYSICS = 0, 1, 2

_PARTS = {
    "trajectory": ((), True),
    "excite": (("excite",), False),
    "evolve": (("evolve",), False),
    "entropy": (("entropy",), False),
    "report": (("excite", "evolve", "entropy"), True),
}

_HELP = {
    "trajectory": "integrate the infall geodesic and export (r, tau, t, r_star)",
    "excite": "numeric vs closed-form excitation probabilities over the (omega, nu) grid",
    "evolve": "evolve each mode from vacuum and compare with the thermal steady state",
    "entropy": "photon-flux entropy and the horizon-area bookkeeping",
    "report": "full pipeline with all checks",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hbar-sim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _PARTS:
        p = sub.add_parser(name, help=_HELP[name])
        p.add_argument("--config", metavar="PATH",
                       help="scenario TOML file (default: the shipped scenario)")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override a config value, e.g. atom.omega=50")
        p.add_argument("--out", metavar="DIR", help="output directory (overrides outputs.directory)")
        p.add_argument("--quiet", action="store_true", help="suppress the summary on stdout")
    return parser


def _summary(report, paths, out):
    for name, check in sorted(report.checks.items()):
        mark = "PASS" if check.passed else "FAIL"
        print(f"{mark} {name}: {check.value:.3e} (bound {check.bound:.1e})", file=out)
    for m in report.modes:
        if not m.ok:
            print(f"  {m.status}", file=out)
    for p in paths:
        print(f"wrote {p}", file=out)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        if args.config:
            cfg = load_config(args.config, args.overrides)
        else:
            cfg = parse_config(default_scenario_text(), args.overrides)
    except (ConfigError, OSError) as exc:
        print(f"hbar-sim: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    parts, with_traj = _PARTS[args.command]
    report = run_scenario(cfg, parts, trajectory=with_traj)
    try:
        paths = emit_outputs(report, cfg, args.command, directory=args.out)
    except OSError as exc:
        print(f"hbar-sim: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not args.quiet:
        _summary(report, paths, sys.stdout)
        print(f"wall clock {report.wall_clock:.2f} s", file=sys.stderr)
    if not report.passed:
        print(f"hbar-sim: failed checks: {', '.join(report.failed_checks())}", file=sys.stderr)
        return EXIT_PHYSICS
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
