"""Command line: ``envyfree <experiment> --config <path> [--seed N] [--out DIR]``.

Exit codes: 0 success, 2 usage or configuration error, 3 data error
(unreadable instance, malformed input, unwritable output directory).
"""
from __future__ import annotations

import argparse
import json
import sys

from . import harness
from .core import ContractError

EXIT_USAGE = 2
EXIT_DATA = 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="envyfree", description="Envy-free classification experiments.")
    p.add_argument("experiment", choices=harness.EXPERIMENTS)
    p.add_argument("--config", help="JSON experiment config (defaults are used when omitted)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--workers", type=int, help="worker processes; output does not depend on it")
    p.add_argument("--no-plots", action="store_true", help="skip SVG charts")
    lb = p.add_argument_group("lowerbound")
    lb.add_argument("--q", type=int, help="grid dimension")
    lb.add_argument("--L", type=float, help="utility Lipschitz constant (at most 8)")
    lb.add_argument("--seeds", type=int, help="number of seeds, starting at --seed")
    lb.add_argument("--strategy", choices=("nn", "constant"), help="extension strategy")
    return p


def _load(args) -> harness.ExperimentConfig:
    doc = {"experiment": args.experiment}
    if args.config:
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise harness.ConfigError(f"cannot read config {args.config}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise harness.ConfigError(f"config {args.config} is not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise harness.ConfigError("config must be a JSON object")
        if doc.get("experiment", args.experiment) != args.experiment:
            raise harness.ConfigError(
                f"config is for {doc['experiment']!r}, not {args.experiment!r}")
        doc = {**doc, "experiment": args.experiment}
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.out is not None:
        doc["out"] = args.out
    if args.workers is not None:
        doc["workers"] = args.workers
    overrides = {k: getattr(args, k) for k in ("q", "L", "seeds", "strategy") if getattr(args, k) is not None}
    if overrides:
        if args.experiment != "lowerbound":
            raise harness.ConfigError("--q/--L/--seeds/--strategy apply to lowerbound only")
        doc["params"] = {**doc.get("params", {}), **overrides}
    return harness.ExperimentConfig.from_dict(doc)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load(args)
        manifest = harness.run(cfg, plots=not args.no_plots)
    except harness.DataError as exc:
        print(f"envyfree: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (harness.ConfigError, ContractError) as exc:
        print(f"envyfree: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"{cfg.experiment}: {len(manifest.rows)} rows -> {cfg.out}/results.csv "
          f"({manifest.wall_time:.2f}s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
