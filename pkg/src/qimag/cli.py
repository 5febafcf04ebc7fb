"""Command line front end: audit, run, eigen.

Exit codes: 0 success, 1 identity/acceptance failure, 2 configuration
error.  `run` dispatches on the config file's mode; `audit` and `eigen`
force their mode (audit needs no config at all).
"""

from __future__ import annotations

import argparse
import sys

from .config import ScenarioConfig, load_config
from .errors import ConfigError, QimagError
from .runner import run_scenario


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qimag",
        description="Numerical audit of generalized imaginary units in "
                    "Schrodinger dynamics")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("audit", "run the identity audit registry"),
            ("run", "execute the mode named in the scenario config"),
            ("eigen", "run the space-dependent rotor eigen-reduction")):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", help="scenario TOML file"
                         + ("" if name != "audit" else " (optional)"))
        cmd.add_argument("--out", default="out", help="output directory (default: out)")
        cmd.add_argument("--seed", type=int, default=None,
                         help="override the config seed")
        cmd.add_argument("--no-timestamp", action="store_true",
                         help="omit timestamps for byte-identical reruns")
        cmd.add_argument("--threads", type=int, default=None,
                         help="audit worker count (deterministic aggregation)")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.config is not None:
            cfg = load_config(args.config)
        elif args.command == "audit":
            cfg = ScenarioConfig(mode="audit")
        else:
            raise ConfigError(f"the {args.command!r} command needs --config")
        if args.command == "audit":
            if cfg.mode != "audit":
                raise ConfigError(
                    f"'audit' command, but config mode is {cfg.mode!r}")
        elif args.command == "eigen":
            if cfg.mode != "eigen-reduce":
                raise ConfigError(
                    f"'eigen' command, but config mode is {cfg.mode!r}")
        if args.seed is not None and args.seed < 0:
            raise ConfigError("--seed must be non-negative")
        return run_scenario(cfg, args.out, timestamp=not args.no_timestamp,
                            threads=args.threads, seed=args.seed)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except QimagError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
