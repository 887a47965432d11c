"""``qttpde`` command line: run, sweep and list benchmark problems."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .bench import REGISTRY, ProblemSpec, emit, run_problem, run_sweep

log = logging.getLogger("qttpde")


def _value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _key_value(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError("expected key=value")
    k, v = text.split("=", 1)
    return k.strip(), _value(v.strip())


def _add_run_options(p: argparse.ArgumentParser):
    p.add_argument("problem", choices=sorted(REGISTRY))
    p.add_argument("--cores", type=int, help="cores per dimension")
    p.add_argument("--timesteps", type=int)
    p.add_argument("--runs", type=int, help="relinearizations (space-time Burgers)")
    p.add_argument("--method", choices=("als", "mals"))
    p.add_argument("--sweeps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--encoder", choices=("analytic", "ttsvd", "interp"))
    p.add_argument("--nodes", type=int, help="interpolation nodes M")
    p.add_argument("--data", help="CSV of samples (poisson-data)")
    p.add_argument("--set", dest="extra", action="append", type=_key_value, default=[],
                   metavar="KEY=VALUE", help="any other problem parameter")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", "-o", help="write records here instead of stdout")


def _params(args) -> dict:
    out = {}
    for name in ("cores", "timesteps", "runs", "method", "sweeps", "seed", "encoder", "nodes", "data"):
        v = getattr(args, name)
        if v is not None:
            out[name] = v
    out.update(dict(args.extra))
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qttpde", description="QTT PDE benchmark runner")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one problem")
    _add_run_options(run)
    sweep = sub.add_parser("sweep", help="run one problem over a list of values")
    _add_run_options(sweep)
    sweep.add_argument("--axis", required=True, choices=("cores", "timesteps", "runs", "datapoints"))
    sweep.add_argument("--values", required=True, help="comma separated integers")
    sub.add_parser("list", help="list problem ids")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    if args.command == "list":
        for pid, entry in REGISTRY.items():
            print(f"{pid:15s} {entry.description} [reference: {entry.reference}]")
        return 0
    try:
        spec = ProblemSpec(args.problem, _params(args))
        if args.command == "run":
            records = [run_problem(spec)]
        else:
            values = [int(v) for v in args.values.split(",") if v.strip()]
            records = run_sweep(spec, args.axis, values)
    except ValueError as exc:
        print(f"qttpde: error: {exc}", file=sys.stderr)
        return 2
    for r in records:
        if not r.ok:
            log.error("%s failed: %s", r.problem, r.error)
        else:
            log.info("%s c=%d mse=%.3e time=%.3fs", r.problem, r.cores_per_dim, r.mse, r.time_s)
    text = emit(records, args.format, args.output)
    if args.output is None:
        sys.stdout.write(text)
    return 0 if all(r.ok for r in records) else 1


if __name__ == "__main__":
    sys.exit(main())
