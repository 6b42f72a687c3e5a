"""Command line entry point.

Exit codes: 0 success, 1 usage error, 2 configuration error, 3 runtime failure.
The ``CONCATGMD_LOG_LEVEL`` environment variable sets the log level when
``--log-level`` is not given.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys

import numpy as np

from concatgmd.channel import ChannelError, capacity, parse_channel
from concatgmd.config import ConfigError, RawConfig, build_channel, build_scheme, load_sim_config, load_sweep_config
from concatgmd.gmd import DECODERS
from concatgmd.multilevel import concat_decode
from concatgmd.simulate import SweepError, fmt, run_exponent_sweep, run_simulation, summary_csv

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3
LOG_ENV = "CONCATGMD_LOG_LEVEL"

log = logging.getLogger("concatgmd")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="configuration file")
    common.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    common.add_argument("--channel", help="channel preset or file, overrides channel.spec")
    common.add_argument("--output", metavar="PATH", help="CSV output path")

    parser = _Parser(prog="concatgmd", description="Concatenated codes with constant-trial GMD decoding.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo word error rate comparison")
    p.add_argument("--seed", type=_u64)
    p.add_argument("--trials", type=_positive)
    p.add_argument("--workers", type=_positive)
    p.add_argument("--variant", action="append", choices=sorted(DECODERS), help="repeatable")
    p.add_argument("--trial-log", metavar="PATH", help="per-trial CSV")

    p = sub.add_parser("exponents", parents=[common], help="error exponent curves as CSV")

    p = sub.add_parser("capacity", parents=[common], help="channel capacity by Blahut-Arimoto")
    p.add_argument("--tol", type=float, default=1e-10)

    p = sub.add_parser("decode", parents=[common], help="decode one received word given in hex")
    p.add_argument("--received", required=True, help="one hex digit per channel output symbol")
    p.add_argument("--variant", action="append", choices=sorted(DECODERS))
    return parser


def _setup_logging(level: str | None) -> None:
    name = (level or os.environ.get(LOG_ENV) or "WARNING").upper()
    if not isinstance(logging.getLevelName(name), int):
        raise UsageError(f"unknown log level {name!r}")
    logging.basicConfig(level=name, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr, force=True)


def _raw(args) -> RawConfig:
    return RawConfig.load(args.config) if args.config else RawConfig()


def cmd_simulate(args) -> int:
    raw = _raw(args)
    for key, val in (("sim.seed", args.seed), ("sim.trials", args.trials), ("sim.workers", args.workers),
                     ("sim.output", args.output), ("sim.trial_log", args.trial_log)):
        if val is not None:
            raw.set(key, val)
    if args.variant:
        raw.set("sim.variants", ",".join(args.variant))
    cfg = load_sim_config(raw, args.channel)
    rows, _ = run_simulation(cfg)
    if not cfg.output:
        sys.stdout.write(summary_csv(rows))
    return EXIT_OK


def cmd_exponents(args) -> int:
    raw = _raw(args)
    if args.output is not None:
        raw.set("exponents.output", args.output)
    cfg = load_sweep_config(raw, args.channel)
    curves = run_exponent_sweep(cfg)
    if not cfg.output:
        from concatgmd.simulate import CURVE_HEADER, _csv_text, curve_rows

        sys.stdout.write(_csv_text(CURVE_HEADER, [r for c in curves for r in curve_rows(c)]))
    return EXIT_OK


def cmd_capacity(args) -> int:
    if args.channel:
        try:
            ch = parse_channel(args.channel)
        except ChannelError as exc:
            raise ConfigError(str(exc), key="--channel") from None
    elif args.config:
        ch = build_channel(_raw(args))
    else:
        raise UsageError("capacity needs --channel or --config")
    C, p = capacity(ch, tol=args.tol)
    print(f"{ch.name}: {fmt(C)} nats / {fmt(C / math.log(2))} bits")
    print("p_X* = " + " ".join(fmt(v) for v in p))
    return EXIT_OK


def _hex_symbols(symbols, bits: int) -> str:
    width = max(1, math.ceil(bits / 4))
    return " ".join(f"{int(s):0{width}x}" for s in symbols)


def cmd_decode(args) -> int:
    if not args.config:
        raise UsageError("decode needs --config")
    raw = _raw(args)
    ch = build_channel(raw, args.channel)
    scheme = build_scheme(raw, ch)
    text = "".join(args.received.split())
    try:
        y = np.array([int(c, 16) for c in text], dtype=np.int64)
    except ValueError:
        raise UsageError("--received must be hexadecimal") from None
    if y.size != scheme.length:
        raise UsageError(f"--received has {y.size} symbols, expected {scheme.length}")
    if y.size and y.max() >= ch.output_size:
        raise UsageError("--received contains symbols outside the channel output alphabet")
    for variant in args.variant or ["revised"]:
        res = concat_decode(scheme, ch, y, variant)
        print(f"[{variant}] outer invocations: {res.outer_invocations}")
        for j, (lv, msg, kj) in enumerate(zip(res.levels, res.messages, scheme.level_bits), 1):
            d = lv.decision
            print(f"  level {j}: estimate  {_hex_symbols(lv.estimate, kj)}")
            print(f"  level {j}: alpha     {' '.join(fmt(a) for a in lv.reliability.alpha)}")
            print(f"  level {j}: codeword  {_hex_symbols(lv.codeword, kj)}")
            print(f"  level {j}: message   {_hex_symbols(msg, kj)}")
            print(f"  level {j}: correlation={fmt(d.correlation)} accepted={int(d.accepted)} "
                  f"trials={d.trials_used} reliable={int(lv.reliable)}")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "exponents": cmd_exponents,
    "capacity": cmd_capacity,
    "decode": cmd_decode,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage())
        _setup_logging(args.log_level)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(str(exc).rstrip(), file=sys.stderr)
        if "usage:" not in str(exc):
            print(parser.format_usage().rstrip(), file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, SweepError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        log.debug("runtime failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
