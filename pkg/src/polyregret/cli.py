"""Command-line interface.

Subcommands: run (one experiment), sweep (a config grid), geometry (domain
constants), bounds (closed-form bound evaluation), project (one projection).
Exit codes: 0 success, 2 config error, 3 numeric non-convergence, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import analysis, domains, harness
from .errors import ConfigError, ConvergenceError, DegenerateGapError, VertexCountError


def _parse_json_arg(text: str, what: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON for {what}: {e}") from e


def _cmd_run(args) -> int:
    config = harness.config_from_json(args.config)
    trace = harness.run_experiment(config)
    out = args.out or config.output_path
    if out:
        harness.export(trace, args.format, out)
    else:
        final_pseudo = trace.final_pseudo_regret
        print(json.dumps({
            "rounds": len(trace),
            "final_regret": trace.final_regret,
            "final_pseudo_regret": final_pseudo,
        }))
    return 0


def _cmd_sweep(args) -> int:
    with open(args.grid) as fh:
        try:
            grid = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON in {args.grid}: {e}") from e
    if not isinstance(grid, list):
        raise ConfigError("sweep grid must be a JSON array of experiment configs")
    configs = [harness.config_from_dict(spec) for spec in grid]
    summaries = harness.sweep(configs)
    if args.out:
        harness.export(summaries, args.format, args.out)
    else:
        for s in summaries:
            print(json.dumps({
                "config_index": s.config_index, "seed": s.seed,
                "final_regret": s.final_regret,
                "final_pseudo_regret": s.final_pseudo_regret,
                "error": s.error,
            }))
    return 0


def _cmd_geometry(args) -> int:
    domain = domains.domain_from_dict(_parse_json_arg(args.domain, "--domain"))
    mean = None
    if args.mean:
        mean = np.array([float(v) for v in args.mean.split(",")])
    base = None
    if args.base_point:
        base = np.array([float(v) for v in args.base_point.split(",")])
    report = analysis.geometry_report(domain, base_point=base, mean=mean,
                                      restarts=args.restarts, seed=args.seed)
    payload = report.to_dict()
    if args.format == "json":
        print(json.dumps(payload))
    else:
        width_key = max(len(k) for k in payload)
        for key, value in payload.items():
            print(f"{key:<{width_key}}  {value}")
    return 0


def _cmd_bounds(args) -> int:
    constants = _parse_json_arg(args.constants, "--constants")
    if args.kind in analysis.ADVERSARIAL_KINDS:
        value = analysis.bound_adversarial(args.kind, constants)
    elif args.kind in analysis.IID_KINDS:
        value = analysis.bound_iid(args.kind, constants)
    else:
        raise ConfigError(
            f"unknown bound kind {args.kind!r}; choose from "
            f"{analysis.ADVERSARIAL_KINDS + analysis.IID_KINDS}")
    if args.format == "json":
        print(json.dumps({"kind": args.kind, "value": value}))
    else:
        print(f"{args.kind}  {value}")
    return 0


def _cmd_project(args) -> int:
    domain = domains.domain_from_dict(_parse_json_arg(args.domain, "--domain"))
    point = np.array([float(v) for v in args.point.split(",")])
    result = domains.project(domain, point)
    print(json.dumps({
        "point": result.point.tolist(),
        "residual": result.residual,
        "iterations": result.iterations,
    }))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polyregret",
                                     description="Online linear optimization experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one experiment from a JSON config")
    p.add_argument("--config", required=True, help="path to the experiment config JSON")
    p.add_argument("--out", default=None, help="output path for the trace")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="run a grid of experiments")
    p.add_argument("--grid", required=True, help="path to a JSON array of configs")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("geometry", help="domain constants (diameter, width, gaps)")
    p.add_argument("--domain", required=True, help='domain JSON, e.g. {"tag":"birkhoff","n":3}')
    p.add_argument("--mean", default=None, help="comma-separated mean cost for gap constants")
    p.add_argument("--base-point", default=None, help="comma-separated base point")
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.set_defaults(func=_cmd_geometry)

    p = sub.add_parser("bounds", help="evaluate a closed-form bound")
    p.add_argument("--kind", required=True)
    p.add_argument("--constants", required=True, help="JSON dict of constants")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("project", help="project a point onto a domain")
    p.add_argument("--domain", required=True)
    p.add_argument("--point", required=True, help="comma-separated coordinates")
    p.set_defaults(func=_cmd_project)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, VertexCountError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (ConvergenceError, DegenerateGapError) as e:
        print(f"numeric error: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
