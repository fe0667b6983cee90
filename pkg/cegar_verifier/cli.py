from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from .bench import ALL_MODES, CORPUS_FAMILIES, DEFAULT_MODES, bench, generate_corpus
from .classifier import classify
from .config import (
    DEFAULT_INDICATOR_COUNT,
    DEFAULT_TIMEOUT,
    EPS_STRICT,
    EXIT_INCONCLUSIVE,
    EXIT_SAT,
    EXIT_UNSAT,
    EXIT_USAGE,
    AbstractionMode,
    DriverConfig,
    RefinementMode,
)
from .driver import run, run_query
from .errors import VerificationError
from .models import Status, VerdictReport
from .network import Network
from .nnet import apply_normalization, load_nnet, serialize_nnet
from .properties import encode_output_property, generate_robustness_query, load_property
from .report import emit_report, format_summary, rows_to_csv
from .utils import setup_logging

EXIT_CODES = {
    Status.UNSAT: EXIT_UNSAT,
    Status.SAT: EXIT_SAT,
    Status.TIMEOUT: EXIT_INCONCLUSIVE,
    Status.INCONCLUSIVE: EXIT_INCONCLUSIVE,
}


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to the usage exit code."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_network_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--net", required=True, help="Network in NNet format")
    parser.add_argument(
        "--apply-normalization",
        action="store_true",
        help="Fold the NNet input/output normalization into the network (inputs are then raw values)",
    )


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--abstraction",
        choices=[m.value for m in AbstractionMode],
        default=AbstractionMode.SATURATION.value,
        help="Initial abstraction (default: saturation)",
    )
    parser.add_argument(
        "--indicators",
        type=int,
        default=DEFAULT_INDICATOR_COUNT,
        help=f"Indicator points for --abstraction indicator (default: {DEFAULT_INDICATOR_COUNT})",
    )
    parser.add_argument("--pair-sample-cap", type=int, help="Score at most this many candidate merges per step")
    parser.add_argument(
        "--refine",
        choices=[m.value for m in RefinementMode],
        default=RefinementMode.CEGAR.value,
        help="Refinement strategy (default: cegar)",
    )
    parser.add_argument("--no-abstraction", action="store_true", help="Solve the classified network directly")
    parser.add_argument(
        "--timeout", type=float, default=DEFAULT_TIMEOUT, help=f"Seconds per run (default: {DEFAULT_TIMEOUT})"
    )
    parser.add_argument("--seed", type=int, default=0, help="Seed for indicator sampling and random refinement")
    parser.add_argument(
        "--eps-strict",
        type=float,
        default=EPS_STRICT,
        help=f"y > c is checked as y >= c + eps-strict (default: {EPS_STRICT})",
    )


def _add_output_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", help="Write the JSON report here instead of stdout")
    parser.add_argument("--dump-classified", help="Write the classified network as NNet")
    parser.add_argument("--omit-timings", action="store_true", help="Report all timings as 0")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="cegar_verifier",
        description="Abstraction-refinement verification of ReLU networks",
    )
    parser.add_argument("--log-file", type=Path, help="Also write DEBUG logs to this file")
    parser.add_argument("-v", "--verbose", action="store_true", help="Show DEBUG logs on the console")
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="Check a property file against a network")
    _add_network_options(verify)
    verify.add_argument("--prop", required=True, help="Property file; output atoms are strict, so y0 >= 1 and y0 <= 1 mean > and <")
    _add_run_options(verify)
    _add_output_options(verify)

    robust = sub.add_parser("robustness", help="Check L-infinity robustness around a point")
    _add_network_options(robust)
    robust.add_argument("--center", required=True, type=_float_list, help="Comma-separated center point")
    robust.add_argument("--delta", type=float, default=0.1, help="Radius of the L-infinity ball (default: 0.1)")
    robust.add_argument("--better", type=int, required=True, help="Output expected to keep the lower score")
    robust.add_argument("--than", type=int, required=True, help="Output that must stay above it")
    _add_run_options(robust)
    _add_output_options(robust)

    cls = sub.add_parser("classify", help="Classify a network and report the size change")
    _add_network_options(cls)
    cls.add_argument("--prop", help="Property file to encode first (needed for multi-output networks)")
    cls.add_argument("--out", required=True, help="Where to write the classified network")

    b = sub.add_parser("bench", help="Run every query of a corpus directory under several modes")
    b.add_argument("directory", type=Path, help="Directory of <id>.nnet / <id>.prop pairs")
    b.add_argument(
        "--modes",
        default=",".join(DEFAULT_MODES),
        help=f"Comma-separated modes from {', '.join(ALL_MODES)} (default: {','.join(DEFAULT_MODES)})",
    )
    b.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT, help="Seconds per query and mode")
    b.add_argument("--indicators", type=int, default=DEFAULT_INDICATOR_COUNT)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", help="Write the CSV here instead of stdout")

    gen = sub.add_parser("generate-corpus", help="Write random network/property pairs")
    gen.add_argument("directory", type=Path)
    gen.add_argument("--count", type=int, default=10)
    gen.add_argument("--family", choices=sorted(CORPUS_FAMILIES), default="random")
    gen.add_argument("--seed", type=int, default=0)
    return parser


# =============================================================================
# Subcommands
# =============================================================================

def _load_network(args: argparse.Namespace) -> tuple:
    net, meta = load_nnet(args.net)
    if args.apply_normalization:
        net = apply_normalization(net, meta)
    return net, meta


def _dump(net: Network, path: str, comment: str) -> None:
    classified = classify(net)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(serialize_nnet(classified, comment=comment), encoding="utf-8")
    print(f"Wrote: {path} ({net.hidden_size()} -> {classified.hidden_size()} hidden neurons)", file=sys.stderr)


def _emit(report: VerdictReport, args: argparse.Namespace) -> int:
    payload = emit_report(report, omit_timings=args.omit_timings)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
    else:
        print(payload)
    print(format_summary(report), file=sys.stderr)
    return EXIT_CODES[report.status]


def _cmd_verify(args: argparse.Namespace, logger) -> int:
    net, _meta = _load_network(args)
    prop = load_property(args.prop, net.input_size, net.output_size)
    cfg = DriverConfig.from_args(args)
    if args.dump_classified:
        encoded, _query = encode_output_property(net, prop)
        _dump(encoded, args.dump_classified, f"classified {args.net} with {args.prop}")
    return _emit(run(net, prop, cfg, logger=logger), args)


def _cmd_robustness(args: argparse.Namespace, logger) -> int:
    net, meta = _load_network(args)
    bounds = (meta.mins, meta.maxes) if args.apply_normalization else meta.normalized_bounds()
    encoded, query = generate_robustness_query(
        net, np.array(args.center), args.delta, args.better, args.than,
        input_bounds=bounds, eps_strict=args.eps_strict,
    )
    if args.dump_classified:
        _dump(encoded, args.dump_classified, f"classified {args.net} for robustness")
    return _emit(run_query(encoded, query, DriverConfig.from_args(args), logger=logger), args)


def _cmd_classify(args: argparse.Namespace, logger) -> int:
    net, _meta = _load_network(args)
    if args.prop:
        net, _query = encode_output_property(net, load_property(args.prop, net.input_size, net.output_size))
    _dump(net, args.out, f"classified {args.net}")
    return 0


def _cmd_bench(args: argparse.Namespace, logger) -> int:
    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    base = DriverConfig.from_args(args)
    rows = bench(args.directory, modes, base, logger=logger)
    payload = rows_to_csv(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as f:
            f.write(payload)
        print(f"Wrote: {args.out} ({len(rows)} rows)", file=sys.stderr)
    else:
        sys.stdout.write(payload)
    return 0


def _cmd_generate(args: argparse.Namespace, logger) -> int:
    paths = generate_corpus(args.directory, args.count, seed=args.seed, family=args.family, logger=logger)
    print(f"Wrote: {len(paths)} queries to {args.directory}", file=sys.stderr)
    return 0


COMMANDS = {
    "verify": _cmd_verify,
    "robustness": _cmd_robustness,
    "classify": _cmd_classify,
    "bench": _cmd_bench,
    "generate-corpus": _cmd_generate,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logger = setup_logging(args.log_file, verbose=args.verbose)
    try:
        return COMMANDS[args.command](args, logger)
    except (VerificationError, ValueError, OSError) as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
