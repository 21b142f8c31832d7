"""Command-line entry point: ``leafvsa <scenario> [flags]``.

Writes the scenario table as CSV (to ``--out`` or stdout) and, with ``--out``,
a JSON run manifest next to it (``<out>.manifest.json``) holding the resolved
configuration, the arguments, the self-checks and the CSV checksum.

Exit codes: 0 success, 1 configuration/validation/runtime failure or a failed
self-check, 2 usage error.
"""

import argparse
import json
import sys

from .config import Config, config_to_dict, load_config
from .csvio import render_csv, write_csv
from .errors import ConfigError, ConvergenceError, ElasticaDomainError, InvalidParameterError, ModelDomainError
from .scenarios import KINDS, ScenarioSpec, run

HELP = {
    "static-torque": "output torque vs deflection for a family of roller positions",
    "stiffness-curve": "equilibrium stiffness vs roller position",
    "disturbance-map": "disturbance torque on the stiffness motor over (q_d, x_r)",
    "deflection-experiment": "clamped-link deflection ramp, stiff vs soft",
    "stiffness-sweep-energy": "motor-2 energy for soft-to-stiff sweeps at and off equilibrium",
    "passive-audit": "energy drift of an undriven frictionless run",
    "simulate": "free response from an initial deflection",
    "elastica-compare": "small-deflection vs elastica contact force",
}


def _floats(text):
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("grid must not be empty")
    return values


def _positive(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def build_parser():
    parser = argparse.ArgumentParser(
        prog="leafvsa", description="Leaf-spring variable stiffness actuator scenarios.")
    sub = parser.add_subparsers(dest="kind", metavar="scenario", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=HELP[kind], description=HELP[kind])
        p.add_argument("--config", metavar="PATH", help="JSON configuration file")
        p.add_argument("--out", metavar="PATH", help="CSV output path (default: stdout)")
        p.add_argument("--dt", type=_positive, help="integration step (s)")
        p.add_argument("--duration", type=_positive, help="run or ramp duration (s)")
        p.add_argument("--qd", type=_floats, default=(), metavar="Q[,Q...]",
                       help="deflection grid (rad); write negative lists as --qd=-0.1,0.1")
        p.add_argument("--xr", type=_floats, default=(), metavar="X[,X...]",
                       help="roller position grid (m)")
        p.add_argument("--oracle", choices=("closed-form", "elastica"), default="closed-form",
                       help="force law for the static curves")
    return parser


def parse_cli(argv):
    """``(ScenarioSpec, config_path_or_None)``; raises ``SystemExit(2)`` on usage errors."""
    args = build_parser().parse_args(argv)
    spec = ScenarioSpec(args.kind, qd=args.qd, xr=args.xr, duration=args.duration, dt=args.dt,
                        out=args.out, oracle=args.oracle)
    return spec, args.config


def manifest(spec, cfg, argv, result, sha256):
    return {
        "scenario": spec.kind,
        "argv": list(argv),
        "config": config_to_dict(cfg),
        "oracle": spec.oracle,
        "columns": list(result.columns),
        "rows": len(result.rows),
        "sha256": sha256,
        "checks": result.checks,
        "passed": result.passed,
        "summary": result.summary,
    }


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        spec, config_path = parse_cli(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    except InvalidParameterError as exc:
        print(f"leafvsa: error: {exc}", file=sys.stderr)
        return 2

    try:
        cfg = load_config(config_path) if config_path else Config()
        result = run(spec, cfg)
        if spec.out:
            digest = write_csv(result.rows, spec.out, result.columns)
            with open(spec.out + ".manifest.json", "w", encoding="utf-8") as fh:
                json.dump(manifest(spec, cfg, argv, result, digest), fh, indent=2, sort_keys=True)
                fh.write("\n")
        else:
            sys.stdout.write(render_csv(result.rows, result.columns))
    except ConfigError as exc:
        print(f"leafvsa: configuration error: {exc}", file=sys.stderr)
        return 1
    except (InvalidParameterError, ModelDomainError, ElasticaDomainError, ConvergenceError,
            RuntimeError, OSError) as exc:
        print(f"leafvsa: {spec.kind} failed: {exc}", file=sys.stderr)
        return 1

    for name, ok in result.checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}", file=sys.stderr)
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
