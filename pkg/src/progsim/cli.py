"""Command-line entry points.

Verbs:

* ``validate``          check a config file and report every problem at once
* ``run``               compute the measure grid and benchmark columns
* ``report``            correlations, clusters, cluster-benchmark table
* ``selftest``          odd/even-sentence self-similarity sanity check
* ``clean-cache``       drop all cached measure values
* ``export-sentences``  write per-document sentence lists (JSON) for
                        external embedding producers
* ``psem-check``        validate embedding-matrix files and print their shapes
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from . import embeddings, pipeline
from .config import load_config, validate_config
from .errors import ConfigError, ProgsimError


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", required=True, type=Path,
                     help="path to the TOML run configuration")
    sub.add_argument("--seed", type=int, default=None,
                     help="override the configured base seed")
    sub.add_argument("--jobs", type=int, default=None,
                     help="override the configured worker count")
    sub.add_argument("--output", type=Path, default=None,
                     help="override the configured output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="progsim",
        description="pairwise programme-similarity measures and benchmarks")
    parser.add_argument("--verbose", action="store_true",
                        help="log progress details to stderr")
    subs = parser.add_subparsers(dest="verb", required=True)

    for verb in ("validate", "run", "report", "selftest", "clean-cache"):
        sub = subs.add_parser(verb)
        _add_common(sub)
    subs.choices["report"].add_argument(
        "--threshold", type=float, default=None,
        help="override the clustering admission threshold")

    sub = subs.add_parser("export-sentences")
    _add_common(sub)
    sub.add_argument("--target", required=True, type=Path,
                     help="directory for the sentence-list files")

    sub = subs.add_parser("psem-check")
    sub.add_argument("files", nargs="+", type=Path,
                     help="embedding-matrix files to validate")
    return parser


def _load(args: argparse.Namespace):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.jobs is not None:
        cfg.jobs = args.jobs
    if args.output is not None:
        cfg.output = args.output.resolve()
    if getattr(args, "threshold", None) is not None:
        cfg.threshold = args.threshold
    specs = validate_config(cfg)
    return cfg, specs


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")

    try:
        if args.verb == "psem-check":
            for path in args.files:
                info = embeddings.validate_psem(path)
                print(f"{path}: producer={info['producer']} "
                      f"dim={info['dim']} rows={info['m']}")
            return 0

        cfg, specs = _load(args)

        if args.verb == "validate":
            print(f"configuration OK ({len(specs)} measures)")
            return 0
        if args.verb == "run":
            stats = pipeline.run(cfg, specs)
            hits = sum(s["hits"] for s in stats.values())
            computed = sum(s["computed"] for s in stats.values())
            print(f"run complete: {len(specs)} measures, "
                  f"{hits} pair values from cache, {computed} computed")
            print(f"outputs in {cfg.output}")
            return 0
        if args.verb == "report":
            pipeline.report(cfg)
            print(f"reports in {cfg.output}")
            return 0
        if args.verb == "selftest":
            rep = pipeline.selftest(cfg)
            n = len(rep.self_values)
            print(f"selftest over {n} qualifying documents")
            if n:
                print(f"median self-similarity:  {rep.median_self:.6f}")
                print(f"median cross-similarity: {rep.median_cross:.6f}")
                sep = rep.separation
                print("separation: " + ("n/a" if math.isnan(sep) else f"{sep:.4f}"))
            return 0
        if args.verb == "clean-cache":
            n = pipeline.clean_cache(cfg)
            print(f"removed {n} cache files")
            return 0
        if args.verb == "export-sentences":
            n = pipeline.export_sentences(cfg, args.target)
            print(f"wrote sentence lists for {n} documents to {args.target}")
            return 0
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return 2
    except ProgsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError(f"unhandled verb {args.verb!r}")


if __name__ == "__main__":
    sys.exit(main())
