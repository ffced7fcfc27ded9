"""Command line entry point: ``vskextrap`` (or ``python -m vskextrap``).

On failure a single JSON object ``{"error": ..., "type": ..., "message": ...}``
is written to stderr and the exit status is nonzero (2 for usage or
configuration problems, 1 for numerical failures, 3 for I/O errors).
"""
import argparse
import json
import logging
import sys

from . import __version__
from .errors import ConfigError, VskError
from .harness import (
    TABLES,
    ExperimentConfig,
    average_seeds,
    emit,
    run_experiment,
    run_many,
    steps_for,
    table_configs,
)

EXIT_NUMERIC = 1
EXIT_USAGE = 2
EXIT_IO = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def build_parser():
    p = _Parser(prog="vskextrap", description="Kernel extrapolation experiments with variably scaled kernels.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--reproduce", choices=sorted(TABLES), help="run the full grid behind a preset table")
    p.add_argument("--config", help="JSON file whose keys mirror ExperimentConfig field names")
    p.add_argument("--function", help="test function f1..f6")
    p.add_argument("--distribution", help="halton, chebyshev, random or uniform")
    p.add_argument("--method", nargs="+", help="one or more of cubic, tps_vsk, svr")
    p.add_argument("--n", type=int, help="number of training nodes (default 30)")
    p.add_argument("--a", type=float, help="left end of the sampling interval (default 0.1)")
    p.add_argument("--b", type=float, help="right end of the sampling interval (default 2)")
    p.add_argument("--lambda", dest="lam", type=float, help="ridge parameter (default 1e-6)")
    p.add_argument("--noise-sigma", type=float, help="standard deviation of Gaussian noise (default 0)")
    p.add_argument("--seed", type=int, help="seed for random nodes and noise (default 0)")
    p.add_argument("--lambda2-max", type=float, help="largest Lambda_2, on the grid b + 0.1 i (default b + 1)")
    p.add_argument("--s", type=int, help="evaluation points per Lambda_2 (default 40)")
    p.add_argument("--ridge", choices=["kernel", "full"], help="diagonal part receiving lambda (default kernel)")
    p.add_argument("--chebyshev-kind", choices=["gauss", "lobatto"], help="Chebyshev variant (default gauss)")
    p.add_argument("--seeds", type=int, default=1, help="average the RMSE over this many consecutive seeds")
    p.add_argument("--jobs", type=int, default=1, help="worker threads for independent configurations")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=["csv", "table", "errors"], default="csv")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def _overrides(args):
    out = {}
    for key in ("n", "a", "b", "lam", "noise_sigma", "seed", "s", "ridge", "chebyshev_kind"):
        val = getattr(args, key)
        if val is not None:
            out[key] = val
    return out


def _configs(args):
    over = _overrides(args)
    if args.lambda2_max is not None:
        over["lambda2_steps"] = steps_for(over.get("b", ExperimentConfig.b), args.lambda2_max)
    if args.reproduce:
        if args.function or args.distribution or args.method or args.config:
            raise ConfigError("--reproduce cannot be combined with --function/--distribution/--method/--config")
        return table_configs(args.reproduce, **over)
    data = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    base = ExperimentConfig.from_mapping(data).to_mapping() if data.get("function_id") and data.get("distribution") else dict(data)
    if "lambda" in base:
        base["lam"] = base.pop("lambda")
    if args.function:
        base["function_id"] = args.function
    if args.distribution:
        base["distribution"] = args.distribution
    if args.method:
        base["methods"] = tuple(m for item in args.method for m in item.split(",") if m)
    base.update(over)
    if "lambda2_max" in base:
        base["lambda2_steps"] = steps_for(base.get("b", ExperimentConfig.b), base.pop("lambda2_max"))
    if "function_id" not in base or "distribution" not in base:
        raise ConfigError("need --function and --distribution (or --reproduce, or a config file)")
    return [ExperimentConfig.from_mapping(base)]


def _fail(exc, code):
    line = {"error": True, "type": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(line), file=sys.stderr)
    return code


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        return _fail(exc, EXIT_USAGE)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        configs = _configs(args)
        keep = args.format == "errors"
        if args.seeds != 1:
            if keep:
                raise ConfigError("--format errors is not available with --seeds")
            results = [r for c in configs for r in average_seeds(c, args.seeds, jobs=args.jobs)]
        elif len(configs) == 1:
            results = run_experiment(configs[0], keep_errors=keep)
        else:
            results = run_many(configs, jobs=args.jobs, keep_errors=keep)
        emit(results, args.format, args.out if args.out else sys.stdout)
    except ConfigError as exc:
        return _fail(exc, EXIT_USAGE)
    except (OSError, json.JSONDecodeError) as exc:
        return _fail(exc, EXIT_IO if isinstance(exc, OSError) else EXIT_USAGE)
    except (VskError, TypeError, ValueError) as exc:
        return _fail(exc, EXIT_NUMERIC)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
