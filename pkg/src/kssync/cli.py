"""Command-line entry point: kssync <scenario> --config FILE [options]."""

from __future__ import annotations

import argparse
import sys

from .config import SCENARIOS, load_config
from .errors import ConfigError, DivergenceError
from .experiments import run_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3
EXIT_IO = 4

# CLI spellings use dashes; config keys use underscores
_CLI_NAMES = {s.replace("_", "-"): s for s in SCENARIOS}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kssync",
        description="Spectral synchronization and parameter estimation experiments.",
    )
    sub = parser.add_subparsers(dest="scenario", required=True, metavar="scenario")
    for name in _CLI_NAMES:
        p = sub.add_parser(name, help=f"run the {name} scenario")
        p.add_argument("--config", required=True, help="path to a key = value config file")
        p.add_argument("--seed", type=int, default=None, help="override base_seed")
        p.add_argument("--out", default=None, help="override output_dir")
        p.add_argument("--jobs", type=int, default=1, help="parallel worker count")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    scenario = _CLI_NAMES[args.scenario]
    try:
        cfg = load_config(args.config, scenario=scenario)
        if args.seed is not None:
            cfg.base_seed = args.seed
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        paths = run_scenario(cfg, jobs=args.jobs, out_dir=args.out)
        print(paths["summary"])
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
