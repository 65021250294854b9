"""Command-line entry point: ``capx run | sweep | diagnose``."""

from __future__ import annotations

import argparse
import json
import sys

from . import experiment
from .config import load_config, parse_config, with_overrides
from .errors import CapxError, ConfigError

__all__ = ["main", "build_parser"]


def build_parser():
    parser = argparse.ArgumentParser(prog="capx", description="Compound-loss capital experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="JSON experiment config")
        p.add_argument("--seed", type=int, help="override mc.seed")
        p.add_argument("--samples", type=int, help="override mc.n_samples")
        p.add_argument("--out", help="override output_path; '-' writes to stdout")
        return p

    common(sub.add_parser("run", help="evaluate every (alpha, method, measure) cell"))
    sweep = common(sub.add_parser("sweep", help="repeat run over values of one model parameter"))
    sweep.add_argument("--param", required=True, help="dotted path, e.g. model.severity.sigma")
    sweep.add_argument("--values", required=True, help="comma-separated numbers")
    common(sub.add_parser("diagnose", help="heavy-tail diagnostics of the model's severity"))
    return parser


def _parse_values(text):
    out = []
    for token in (t.strip() for t in text.split(",")):
        if not token:
            continue
        try:
            out.append(float(token))
        except ValueError:
            raise ConfigError(f"not a number: {token!r}", "values") from None
    return out


def _resolve(args):
    cfg = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["mc.seed"] = args.seed
    if args.samples is not None:
        overrides["mc.n_samples"] = args.samples
    if args.out is not None:
        overrides["output_path"] = None if args.out == "-" else args.out
    if overrides:
        cfg = parse_config(with_overrides(cfg.raw, **overrides))
    return cfg


def _emit(cfg, writer, *payload):
    if cfg.output_path:
        with open(cfg.output_path, "w", newline="") as fh:
            writer(*payload, fh)
    else:
        writer(*payload, sys.stdout)


def _dispatch(args):
    cfg = _resolve(args)
    if args.command == "run":
        _emit(cfg, experiment.write_rows, experiment.run_experiment(cfg, write=False))
    elif args.command == "sweep":
        results = experiment.sensitivity_sweep(cfg, args.param, _parse_values(args.values),
                                               write=False)
        _emit(cfg, experiment.write_sweep, args.param, results)
    else:
        _emit(cfg, experiment.write_diagnostics, experiment.diagnose(cfg, write=False))


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        _dispatch(args)
    except CapxError as exc:
        record = {"error": type(exc).__name__, "message": str(exc)}
        path = getattr(exc, "path", None)
        if path is not None:
            record["path"] = path
        print(json.dumps(record), file=sys.stderr)
        return 2 if isinstance(exc, ConfigError) else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
