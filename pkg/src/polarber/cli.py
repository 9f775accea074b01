"""Command-line interface.

Subcommands, one per pipeline stage::

    polarber construct --theta 0.78 --n 8 --mode exact --paper-style
    polarber construct --bsc 0.11 --n 10 --mode interval --Q 512 --out t.csv
    polarber quantize  --list in.json --Q 64 --direction degrade --out out.json
    polarber select    t.csv --k 512 --out spec.json
    polarber bounds    t.csv --spec spec.json
    polarber simulate  --bsc 0.11 --spec spec.json --trials 100000 --seed 1

Every artifact is a plain CSV or JSON file, so stages compose through the
file system.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import kernels
from .codec import BLOCK, GENIE, ChannelModel, monte_carlo
from .construct import (
    DEFAULT_Q,
    EXACT_MODE,
    analyze_all,
    INTERVAL_MODE,
    PAPER_DIGITS,
    block_error_bounds,
    codespec_from_dict,
    codespec_to_dict,
    records_from_csv,
    records_to_csv,
    select_frozen,
)
from .quantize import DEGRADE, DIRECTIONS, QuantizeConfig, quantize
from .scalar import format_scalar, parse_scalar, to_decimal_directed
from .symparam import ResourceLimitError, SymParamList, canonicalize, list_to_json, read_list, require_valid, write_list


class CliError(Exception):
    """Invalid configuration detected after argument parsing."""


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _probability(text: str) -> Fraction:
    value = parse_scalar(text)
    if not 0 <= value <= Fraction(1, 2):
        raise CliError(f"crossover probability {text} is outside [0, 1/2]")
    return value


def _base_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--theta", help="single-entry base list {(1, theta)}")
    g.add_argument("--bsc", help="binary symmetric channel with this crossover probability")
    g.add_argument("--list", dest="list_file", help="base list file (.json or .csv)")


def _model(args) -> ChannelModel:
    if args.bsc is not None:
        return ChannelModel.bsc(_probability(args.bsc))
    if args.theta is not None:
        base = SymParamList.from_pairs([(1, args.theta)])
    else:
        base = read_list(args.list_file)
    require_valid(base)
    return ChannelModel.side_info(base)


def _read_records(path: str):
    with open(path) as fh:
        return records_from_csv(fh.read())


def _read_spec(path: str):
    with open(path) as fh:
        return codespec_from_dict(json.load(fh))


# ---------------------------------------------------------------- commands

def cmd_construct(args) -> None:
    if args.n < 1:
        raise CliError("--n must be at least 1")
    if args.mode == INTERVAL_MODE and args.Q is None:
        raise CliError("interval mode requires --Q")
    base = _model(args).base_list()
    records = analyze_all(
        base,
        args.n,
        args.mode,
        args.Q if args.Q is not None else DEFAULT_Q,
        grid_bits=args.grid_bits,
        threads=args.threads,
        backend=args.backend,
    )
    _emit(records_to_csv(records, paper_style=args.paper_style), args.out)


def cmd_quantize(args) -> None:
    P = read_list(args.list_file)
    require_valid(P)
    Pc = canonicalize(P)
    out, cert = quantize(Pc, QuantizeConfig(args.Q, args.direction, args.pin))
    if args.out is None or args.out == "-":
        sys.stdout.write(list_to_json(out) + "\n")
    else:
        write_list(out, args.out)
    if args.certificate:
        with open(args.certificate, "w") as fh:
            json.dump(
                {
                    "direction": args.direction,
                    "Q": args.Q,
                    "theta_c": format_scalar(cert.theta_c),
                    "delta_bound": format_scalar(cert.delta_bound),
                    "actual_merge_loss_sum": format_scalar(cert.actual_merge_loss_sum),
                    "merges": len(cert.merge_losses),
                    "holds": cert.holds,
                },
                fh,
                indent=1,
            )
            fh.write("\n")


def cmd_select(args) -> None:
    if (args.k is None) == (args.beta is None):
        raise CliError("give exactly one of --k and --beta")
    spec = select_frozen(_read_records(args.records), k=args.k, beta=args.beta)
    _emit(json.dumps(codespec_to_dict(spec), indent=1) + "\n", args.out)


def cmd_bounds(args) -> None:
    records = _read_records(args.records)
    I0 = _read_spec(args.spec).I0
    lower, upper = block_error_bounds(records, I0)
    out = {"block_lower": format_scalar(lower), "block_upper": format_scalar(upper)}
    if args.paper_style:
        out = {
            "block_lower": to_decimal_directed(lower, PAPER_DIGITS, "down"),
            "block_upper": to_decimal_directed(upper, PAPER_DIGITS, "up"),
        }
    _emit(json.dumps(out, indent=1) + "\n", args.out)


def cmd_simulate(args) -> None:
    if args.trials < 1:
        raise CliError("--trials must be positive")
    spec = _read_spec(args.spec)
    stats = monte_carlo(
        _model(args), spec, args.trials, seed=args.seed, mode=args.sim_mode,
        threads=args.threads, backend=args.backend,
    )
    _emit(json.dumps(stats.to_dict(), indent=1) + "\n", args.out)


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polarber", description="Exact and interval bit error probabilities of polar codes.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="output file (stdout by default)")
        p.add_argument("--threads", type=int, default=1, help="worker threads; results do not depend on it")
        p.add_argument("--backend", choices=["compiled", "python"], default=None, help="kernel backend")

    p = sub.add_parser("construct", help="bit error probability of every index")
    _base_args(p)
    p.add_argument("--n", type=int, required=True, help="number of levels")
    p.add_argument("--mode", choices=[EXACT_MODE, INTERVAL_MODE], default=EXACT_MODE)
    p.add_argument("--Q", type=int, default=None, help="list size of interval mode")
    p.add_argument("--grid-bits", type=int, default=None, help="dyadic grid resolution of interval mode (default grows with Q)")
    p.add_argument("--paper-style", action="store_true", help="signed 4-digit display")
    common(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("quantize", help="degrade or upgrade a list to at most Q entries")
    p.add_argument("--list", dest="list_file", required=True)
    p.add_argument("--Q", type=int, required=True)
    p.add_argument("--direction", choices=DIRECTIONS, default=DEGRADE)
    p.add_argument("--pin", action="store_true", help="keep an entry at theta = 1 out of the merges")
    p.add_argument("--certificate", help="write the precision certificate as JSON")
    p.add_argument("--out")
    p.set_defaults(func=cmd_quantize)

    p = sub.add_parser("select", help="choose the decided set from a construct CSV")
    p.add_argument("records", help="construct CSV")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("bounds", help="block error bounds of a code")
    p.add_argument("records", help="construct CSV")
    p.add_argument("--spec", required=True, help="code JSON from select")
    p.add_argument("--paper-style", action="store_true", help="4-digit outward-rounded display")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("simulate", help="Monte Carlo check of the SC decoder")
    _base_args(p)
    p.add_argument("--spec", required=True, help="code JSON from select")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sim-mode", choices=[GENIE, BLOCK], default=GENIE)
    common(p)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be positive")
    if getattr(args, "backend", None) == "compiled" and "compiled" not in kernels.available():
        print("polarber: error: compiled kernels are not built", file=sys.stderr)
        return 1
    try:
        args.func(args)
    except (CliError, ValueError, TypeError, ResourceLimitError, OSError) as exc:
        print(f"polarber: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
