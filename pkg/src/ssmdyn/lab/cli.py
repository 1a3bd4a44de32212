"""Command line entry point: ``ssmdyn <command> --config <path> [--out DIR]``.

Exit codes: 0 success, 1 config (or closed-form domain) error, 2 a run
diverged, 3 I/O error.
"""

import argparse
import json
import logging
import os
import sys
import time

from ..errors import ConfigError, DomainError
from . import config as cfgmod
from . import runner

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("ssmdyn")

# command used for each shipped config by the ``suite`` command
SUITE = {
    "balanced_scalar": "compare",
    "width_sweep": "sweep",
    "width_curves": "analytic",
    "learn_readout": "compare",
    "learn_transition": "compare",
    "dt_sweep": "sweep",
    "stacked": "train",
}


def build_parser():
    parser = argparse.ArgumentParser(prog="ssmdyn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help, config_required=True):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", required=config_required,
                       help="experiment JSON file, or builtin:<name> for a shipped default")
        p.add_argument("--out", help="output directory (default: runs/<config name>)")
        p.add_argument("--seed", type=int, help="override data.seed")
        p.add_argument("--quiet", action="store_true", help="only report errors")
        return p

    add("gen", "write the synthetic spectra and their statistics")
    add("train", "integrate the gradient flow and write trajectory.csv")
    add("analytic", "evaluate closed-form curves into curves/*.csv").add_argument(
        "--formula", choices=cfgmod.FORMULAS, help="override analytic.formula")
    add("compare", "train, then compare against the configured closed form")
    add("sweep", "one run per sweep value, aggregated into sweep.csv").add_argument(
        "--jobs", type=int, help="worker processes (default: sweep.jobs)")
    add("validate", "check a config and print its hash")
    add("suite", "run every shipped default experiment", config_required=False)
    return parser


def _load(args):
    raw = cfgmod.load_raw(args.config)
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            raise ConfigError("--seed", "must be an unsigned 64-bit integer")
        raw = cfgmod.set_path(raw, "data.seed", args.seed)
    return raw


def _out_dir(args, cfg):
    return args.out or os.path.join("runs", cfg["name"])


def dispatch(command, raw, out_dir, args=None):
    if command == "gen":
        return runner.run_gen(raw, out_dir)
    if command == "train":
        return runner.run_train(raw, out_dir)
    if command == "analytic":
        return runner.run_analytic(raw, out_dir, getattr(args, "formula", None))
    if command == "compare":
        return runner.run_compare(raw, out_dir)
    if command == "sweep":
        return runner.run_sweep(raw, out_dir, getattr(args, "jobs", None))
    raise ValueError(f"unknown command {command!r}")


def run_suite(out_root, seed=None):
    results = {}
    for name, command in SUITE.items():
        raw = cfgmod.load_raw(f"builtin:{name}")
        if seed is not None:
            raw = cfgmod.set_path(raw, "data.seed", seed)
        start = time.perf_counter()
        res = dispatch(command, raw, os.path.join(out_root, name))
        log.info("%-12s %-8s %-9s %.2fs", name, command, res.status, time.perf_counter() - start)
        results[name] = res
    return results


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO, format="%(message)s")
    try:
        if args.command == "suite":
            results = run_suite(args.out or "runs", args.seed)
            return EXIT_DIVERGED if any(r.status == "diverged" for r in results.values()) else EXIT_OK
        raw = _load(args)
        cfg = cfgmod.normalize(raw)
        if args.command == "validate":
            if not args.quiet:
                print(json.dumps({"name": cfg["name"], "config_hash": cfgmod.config_hash(cfg), "valid": True}))
            return EXIT_OK
        out_dir = _out_dir(args, cfg)
        result = dispatch(args.command, raw, out_dir, args)
        if result.report is not None:
            log.info("%s: sup=%.3g rms=%.3g (%s)", result.report["formula"], result.report["sup_norm"],
                     result.report["rms"], result.report["verdict"])
        log.info("%s -> %s [%s]", args.command, out_dir, result.status)
        return EXIT_DIVERGED if result.status == "diverged" else EXIT_OK
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
