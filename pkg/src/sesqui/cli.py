"""Command line entry point: ``sesqui {suite,sweep,quon,gns,coherent}``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

import numpy as np

from .errors import NumericalError, SesquiError
from .harness import ConfigError, load_config, run_suite, sweep_table

log = logging.getLogger("sesqui")

EXIT_OK, EXIT_CONFIG, EXIT_CHECK, EXIT_NUMERICAL = 0, 1, 2, 3

SUBSETS = {
    "suite": None,
    "quon": ("ladder",),
    "gns": ("gns",),
    "coherent": ("coherent",),
}


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument("--q", type=float, nargs="+", help="deformation parameters in [-1, 1]")
    common.add_argument("--levels", type=int, nargs="+", help="truncation levels N")
    common.add_argument("--p", type=float, nargs="+", help="Schatten exponents (>= 2)")
    common.add_argument("--seed", type=int, help="base RNG seed")
    common.add_argument("--out", help="output directory")
    common.add_argument("--workers", type=int, help="concurrent grid points")
    common.add_argument("--rank-tol", type=float, help="GNS null-space tolerance (relative)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="sesqui", description="Trace-form eigenstate and quon ladder checks.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("suite", parents=[common], help="run every check section over the grid")
    sub.add_parser("sweep", parents=[common], help="write the per-level sweep table")
    sub.add_parser("quon", parents=[common], help="ladder and norm checks only")
    sub.add_parser("gns", parents=[common], help="GNS checks only")
    sub.add_parser("coherent", parents=[common], help="coherent-form checks only")
    return p


def _config(args):
    cfg = load_config(args.config, q=args.q, levels=args.levels, p=args.p, seed=args.seed,
                      output_dir=args.out, workers=args.workers)
    if args.rank_tol is not None:
        if not args.rank_tol > 0:
            raise ConfigError("--rank-tol must be positive")
        cfg = replace(cfg, tolerances=replace(cfg.tolerances, rank_tol=args.rank_tol))
    subset = SUBSETS.get(args.command)
    if subset is not None:
        cfg = replace(cfg, checks=subset)
    return cfg


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = _config(args)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    try:
        if args.command == "sweep":
            rows, path = sweep_table(cfg)
            log.info("wrote %d rows to %s", len(rows), path)
            return EXIT_OK
        result = run_suite(cfg)
    except (np.linalg.LinAlgError, NumericalError, FloatingPointError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    except SesquiError as exc:
        log.error("check failed: %s", exc)
        return EXIT_CHECK
    if result.exit_code == EXIT_OK:
        log.info(result.message)
    else:
        log.error(result.message)
    log.info("reports in %s", cfg.output_dir)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
