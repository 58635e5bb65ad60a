"""Command-line interface.

    python main.py run --config cfg.json --seed 7 --out results/run7
    python main.py run --preset c1 --seeds 5 --out results/c1
    python main.py cqpoints --dim 2 --order 2
    python main.py complexity --n 20 --m 20 --c 2 --s 100 --nprime 2

Exit codes: 0 success, 1 runtime failure, 2 usage or config error.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from app.core.config import settings
from app.core.errors import ConfigError, SimulationError
from app.core.utils.logger import get_logger, setup_logging
from app.services.catalog_service import catalog_service
from app.services.config_loader import config_loader
from app.services.experiment_service import experiment_service
from app.services.results_writer import results_writer

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return number


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gos-lab",
        description="Goal-oriented sensor scheduling simulator",
    )
    parser.add_argument("--log-level", default=None, help="override LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment or a batch of seeded replications")
    run.add_argument("--config", type=Path, default=None, help="experiment config (JSON); defaults apply when omitted")
    run.add_argument("--seed", type=int, default=None, help="master seed (overrides the config)")
    run.add_argument("--seeds", type=_positive_int, default=None, help="number of replications with derived seeds")
    run.add_argument("--out", type=Path, default=None, help="output directory")
    run.add_argument("--scheduler", choices=["proposed", "benchmark_drl", "montecarlo"], default=None)
    run.add_argument("--preset", choices=["c1", "c2", "c3", "c4"], default=None)
    run.add_argument("--mu", type=float, default=None)
    run.add_argument("--nlsd", default=None)
    run.add_argument("--horizon", type=_positive_int, default=None)
    run.add_argument("--warmup", type=int, default=None)
    run.add_argument("--n-jobs", type=int, default=None, help="parallel replications (-1 = all cores)")
    run.add_argument("--filter-trace", action="store_true", help="also write filter_trace.csv")
    run.add_argument("--weights", action="store_true", help="also write weights.json")

    cq = sub.add_parser("cqpoints", help="print the CQ point set as JSON")
    cq.add_argument("--dim", type=_positive_int, required=True)
    cq.add_argument("--order", type=_positive_int, required=True)
    cq.add_argument("--root-method", choices=["bisection", "companion"], default="bisection")

    cx = sub.add_parser("complexity", help="print per-step operation counts of the schedulers")
    cx.add_argument("--n", type=_positive_int, required=True)
    cx.add_argument("--m", type=_positive_int, required=True)
    cx.add_argument("--c", type=_positive_int, required=True)
    cx.add_argument("--s", type=_positive_int, required=True)
    cx.add_argument("--nprime", type=_positive_int, required=True)
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    overrides = {
        "scheduler": args.scheduler,
        "preset": args.preset,
        "mu": args.mu,
        "nlsd": args.nlsd,
        "horizon": args.horizon,
        "warmup": args.warmup,
        "seed": args.seed,
    }
    if args.config is not None:
        cfg = config_loader.load(args.config, overrides)
    else:
        cfg = config_loader.validate({}, overrides)
    if args.filter_trace or args.weights:
        cfg = cfg.model_copy(update={"outputs": cfg.outputs.model_copy(update={
            "filter_trace": cfg.outputs.filter_trace or args.filter_trace,
            "weight_snapshot": cfg.outputs.weight_snapshot or args.weights,
        })})

    out = args.out or Path(cfg.output_dir or settings.OUTPUT_DIR)
    if args.seeds:
        results, aggregate = experiment_service.run_replications(cfg, args.seeds, n_jobs=args.n_jobs)
        results_writer.write_replications(out, results, aggregate, filter_trace=cfg.outputs.filter_trace)
        print(json.dumps(aggregate.model_dump(mode="json"), indent=2))
    else:
        result = experiment_service.run_experiment(cfg)
        results_writer.write_run(out, result, filter_trace=cfg.outputs.filter_trace)
        summary = result.summary.model_dump(mode="json", exclude={"config_echo"})
        print(json.dumps(summary, indent=2))
    return EXIT_OK


def _cmd_cqpoints(args: argparse.Namespace) -> int:
    response = catalog_service.cq_points(args.dim, args.order, args.root_method)
    print(json.dumps(response.model_dump(), indent=2))
    return EXIT_OK


def _cmd_complexity(args: argparse.Namespace) -> int:
    response = catalog_service.complexity(args.n, args.m, args.c, args.s, args.nprime)
    print(json.dumps(response.model_dump(), indent=2))
    print(catalog_service.complexity_text(response))
    return EXIT_OK


COMMANDS = {
    "run": _cmd_run,
    "cqpoints": _cmd_cqpoints,
    "complexity": _cmd_complexity,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK

    setup_logging(args.log_level or settings.LOG_LEVEL, settings.LOG_TO_FILE, settings.LOG_DIR)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        logger.failure("Invalid configuration", {"error": str(exc)})
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SimulationError as exc:
        logger.failure("Simulation failed", {"error": str(exc)})
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except Exception as exc:
        logger.failure("Unexpected failure", {"error": str(exc), "type": type(exc).__name__}, exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
