"""Command-line entry point: ``kickrotor simulate|scan|preset|validate``.

Exit codes: 0 success, 2 invalid configuration, 3 basis truncation.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, ScenarioConfig, dump_yaml, load_config, resolve, validate
from .kicks import BasisTruncationError
from .scenarios import PRESETS, SCAN_AXES, run_preset, run_scenario, scan

EXIT_CONFIG = 2
EXIT_TRUNCATION = 3


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be in [0, 2^64), got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _common(parser):
    parser.add_argument("--config", type=Path, help="scenario config (YAML or JSON)")
    parser.add_argument("--seed", type=_u64, help="override base_seed of every train block")
    parser.add_argument("--out", type=Path, help="output directory")
    parser.add_argument("--jmax", type=_positive_int, help="override molecule.j_max")
    parser.add_argument("--threads", type=_positive_int, default=1,
                        help="trains simulated concurrently (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kickrotor", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one scenario config")
    _common(p)
    p = sub.add_parser("scan", help="sweep one axis of a scenario config")
    _common(p)
    p.add_argument("--axis", required=True, choices=SCAN_AXES)
    p.add_argument("--values", required=True, type=float, nargs="+",
                   help="axis values (period in units of T_rev)")
    p = sub.add_parser("preset", help="run a figure preset")
    p.add_argument("name", choices=PRESETS)
    _common(p)
    p = sub.add_parser("validate", help="check a config and print it resolved")
    _common(p)
    return parser


def _load(args) -> ScenarioConfig:
    if args.config is None:
        raise ConfigError(["--config: required for this command"])
    config = load_config(args.config)
    if args.seed is not None:
        for t in config.trains:
            t.base_seed = args.seed
    if args.jmax is not None:
        config.molecule.j_max = args.jmax
    validate(config)
    return config


def _out_dir(args, config=None):
    if args.out is not None:
        return args.out
    return Path(config.output.directory) if config is not None else Path("out")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            print(dump_yaml(resolve(_load(args))), end="")
            return 0
        if args.command == "simulate":
            config = _load(args)
            out = _out_dir(args, config)
            run_scenario(config, out, args.threads)
        elif args.command == "scan":
            config = _load(args)
            out = _out_dir(args, config)
            values = [int(v) for v in args.values] if args.axis == "n_pulses" else args.values
            scan(config, args.axis, values, out, args.threads)
        else:
            if args.config is not None:
                raise ConfigError(["--config: presets are fixed; use simulate for custom configs"])
            out = args.out or Path("out") / args.name
            run_preset(args.name, out, args.threads, args.seed, args.jmax)
    except ConfigError as exc:
        print(f"kickrotor: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BasisTruncationError as exc:
        print(f"kickrotor: {exc}", file=sys.stderr)
        return EXIT_TRUNCATION
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
