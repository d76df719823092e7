"""Command-line front end.

Exit codes: 0 message delivered, 1 usage or configuration error,
2 session aborted because the check phase detected eavesdropping.
"""
from __future__ import annotations

import argparse
import json
import secrets
import sys
import time
from pathlib import Path

import numpy as np

from . import analysis
from .adversary import AttackAction, AttackModel, BasisPolicy
from .protocol import ProtocolParams, run_session

EXIT_OK, EXIT_USAGE, EXIT_ABORTED = 0, 1, 2

ATTACKS = {
    "none": lambda p: AttackModel.none(),
    "ir-z": lambda p: AttackModel.intercept_resend(BasisPolicy.ALWAYS_Z, p),
    "ir-x": lambda p: AttackModel.intercept_resend(BasisPolicy.ALWAYS_X, p),
    "ir-random": lambda p: AttackModel.intercept_resend(BasisPolicy.UNIFORM_RANDOM, p),
    "collective": lambda p: AttackModel.collective(False, p),
    "collective-h": lambda p: AttackModel.collective(True, p),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fraction(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _add_session_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--pairs", type=int, required=True, help="number of EPR pairs N")
    msg = p.add_mutually_exclusive_group()
    msg.add_argument("--message-hex", help="secret message as hex (4 bits per digit)")
    msg.add_argument("--message-bits", help="secret message as a 0/1 string")
    p.add_argument("--attack", choices=sorted(ATTACKS), default="none")
    p.add_argument("--attack-probability", type=_fraction, default=1.0)
    p.add_argument("--hadamard-fraction", type=_fraction, default=0.5)
    p.add_argument("--check-fraction", type=_fraction, default=0.5)
    p.add_argument("--threshold", type=_fraction, default=0.0, help="abort if check error rate exceeds this")
    p.add_argument("--seed", type=int, help="64-bit master seed (generated and printed if omitted)")
    p.add_argument("--report", type=Path, help="write the JSON report here")
    p.add_argument("--metadata", type=Path, help="write timing metadata here")
    p.add_argument("--samples", type=int, default=0, help="Monte Carlo samples per oracle cell (0 = skip)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qsdc", description="EPR-pair quantum secure direct communication simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run one session")
    _add_session_flags(run)
    run.add_argument("--transcript", type=Path, help="write the announcement log (JSON lines) here")

    oracle = sub.add_parser("oracle", help="write exact outcome tables")
    oracle.add_argument("--attack", choices=sorted(ATTACKS), default="none")
    oracle.add_argument("--alice-bit", choices=["0", "1", "both"], default="both")
    oracle.add_argument("--hadamard", choices=["t", "f", "both"], default="both")
    oracle.add_argument("--output", type=Path)

    sweep = sub.add_parser("sweep", help="run one session per attack probability")
    _add_session_flags(sweep)
    sweep.add_argument("--grid", required=True, help="comma-separated attack probabilities")
    return parser


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    seed = secrets.randbits(63)
    print(f"seed: {seed}", file=sys.stderr)
    return seed


def _message(args, seed: int, pairs: int, check_fraction: float) -> str:
    if args.message_hex is not None:
        return analysis.hex_to_bits(args.message_hex)
    if args.message_bits is not None:
        return args.message_bits
    # no message given: fill every message pair with seeded random bits
    capacity = ProtocolParams(pairs, "", 0.5, check_fraction, 0.0, 0).capacity
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(3)[2])
    return "".join(map(str, rng.integers(0, 2, size=capacity)))


def _validate(args) -> None:
    if args.pairs < 1:
        raise ValueError(f"--pairs must be positive, got {args.pairs}")
    if args.samples and args.samples < 1000:
        raise ValueError("--samples must be 0 or at least 1000")
    if not 0.0 < args.check_fraction < 1.0:
        raise ValueError("--check-fraction must lie strictly inside (0, 1)")


def _params(args, seed: int) -> ProtocolParams:
    return ProtocolParams(
        n_pairs=args.pairs,
        message=_message(args, seed, args.pairs, args.check_fraction),
        hadamard_fraction=args.hadamard_fraction,
        check_fraction=args.check_fraction,
        abort_threshold=args.threshold,
        master_seed=seed,
    )


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _session_report(params, attack, samples):
    start = time.perf_counter()
    result = run_session(params, attack)
    elapsed = time.perf_counter() - start
    report = analysis.build_report(result, elapsed, tv_samples=samples)
    return result, report


def cmd_run(args) -> int:
    _validate(args)
    seed = _resolve_seed(args)
    params = _params(args, seed)
    attack = ATTACKS[args.attack](args.attack_probability)
    result, report = _session_report(params, attack, args.samples)

    if args.report:
        args.report.write_text(_dump(report.to_dict()))
    if args.metadata:
        args.metadata.write_text(_dump(report.metadata()))
    if args.transcript:
        lines = [json.dumps(r, separators=(",", ":")) for r in result.transcript.to_records()]
        args.transcript.write_text("\n".join(lines) + "\n")

    rate = report.check_error_rate
    status = "aborted" if result.aborted else "delivered"
    print(f"{status}: check error {rate.rate:.4f} [{rate.low:.4f}, {rate.high:.4f}] over {rate.trials} checks")
    if not result.aborted:
        print(f"message ({len(result.recovered_message)} bits): {analysis.bits_to_hex(result.recovered_message)}")
    return EXIT_ABORTED if result.aborted else EXIT_OK


def _oracle_cells(args) -> list:
    try:
        action = AttackAction(args.attack)
    except ValueError:
        raise ValueError(f"attack {args.attack!r} is not a single episode configuration") from None
    bits = (0, 1) if args.alice_bit == "both" else (int(args.alice_bit),)
    flags = (False, True) if args.hadamard == "both" else (args.hadamard == "t",)
    return [(b, h, action) for b in bits for h in flags]


def cmd_oracle(args) -> int:
    tables = [analysis.exact_distribution(*cell).to_dict() for cell in _oracle_cells(args)]
    text = _dump(tables)
    if args.output:
        args.output.write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _grid(text: str) -> list:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"bad --grid value: {text!r}") from None
    if not values:
        raise ValueError("--grid is empty")
    if any(not 0.0 <= v <= 1.0 for v in values):
        raise ValueError("--grid values must lie in [0, 1]")
    return values


def cmd_sweep(args) -> int:
    grid = _grid(args.grid)
    _validate(args)
    seed = _resolve_seed(args)
    params = _params(args, seed)
    reports = []
    for prob in grid:
        _, report = _session_report(params, ATTACKS[args.attack](prob), args.samples)
        reports.append(report)
        print(
            f"p={prob:.3f}: check error {report.check_error_rate.rate:.4f} "
            f"(exact {report.expected_check_error_rate:.4f})"
        )
    if args.report:
        args.report.write_text(_dump({"grid": grid, "reports": [r.to_dict() for r in reports]}))
    if args.metadata:
        args.metadata.write_text(_dump([r.metadata() for r in reports]))
    return EXIT_OK


COMMANDS = {"run": cmd_run, "oracle": cmd_oracle, "sweep": cmd_sweep}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except (UsageError, ValueError) as exc:
        print(f"qsdc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
