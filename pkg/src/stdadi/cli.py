"""``stdadi`` command line: featurize, verify, enumerate."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import verify
from .enumeration import REFERENCE_COUNT, count_summary, enumerate_specs, match_stdadi
from .pipeline import FORMATS, PipelineConfig, expand_inputs, featurize_file
from .skeleton_io import SkeletonParseError

log = logging.getLogger("stdadi")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2

VERIFY_MODES = ("analytic", "spline", "negative-control")
VERIFY_DEFAULTS = {
    "analytic": {"trials": 1000, "tol": 1e-6},
    "spline": {"trials": 200, "tol": 1e-2},
    "negative-control": {"trials": 100, "tol": 0.1},
}

COUNT_NOTE = (
    "Counting convention: sorted index triples, equal factor counts and order sums on both sides, "
    "no triple shared between numerator and denominator, and a ratio identified with its reciprocal. "
    "The reference total of {reference} matches the number of unordered pairs of the 10 triples with "
    "repetition (10*11/2), not the number of balanced ratios; the convention behind it is not stated, "
    "so the two totals are reported side by side."
)


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
    p.add_argument("--seed", type=int, default=0, help="base random seed (default 0)")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stdadi", description="Dual affine differential invariant features for 3D joint trajectories."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    f = sub.add_parser("featurize", help="write (11, frames, joints, bodies) tensors for .skeleton files")
    f.add_argument("--input", "-i", nargs="+", required=True, help=".skeleton files or directories")
    f.add_argument("--output", "-o", help="output directory (default: next to each input)")
    f.add_argument("--format", choices=FORMATS, default="raw_f32")
    f.add_argument("--epsilon", type=float, default=1e-8, help="denominator regularizer (default 1e-8)")
    f.add_argument("--no-squash", action="store_true", help="write raw invariants instead of tanh")
    f.add_argument("--max-bodies", type=int, default=2)
    f.add_argument("--min-frames", type=int, default=12, help="skip shorter sequences (>= 6)")
    f.add_argument("--skip-bad", action="store_true", help="log unreadable files and keep going")
    _add_common(f)

    v = sub.add_parser("verify", help="randomized invariance checks against closed-form trajectories")
    v.add_argument("--mode", choices=VERIFY_MODES, default="analytic")
    v.add_argument("--trials", type=int, help="number of trials (mode default)")
    v.add_argument("--tol", type=float, help="tolerance, or the change threshold for the negative control")
    v.add_argument("--samples", type=int, default=256, help="samples per trajectory in spline mode")
    v.add_argument("--time-scale", type=float, help="fix c in negative-control mode")
    v.add_argument("--json", action="store_true", help="print the report as JSON")
    _add_common(v)

    e = sub.add_parser("enumerate", help="list balanced determinant ratios")
    e.add_argument("--max-degree", type=int, default=2)
    e.add_argument("--max-order", type=int, default=4)
    e.add_argument("--json", action="store_true", help="print the summary as JSON")
    _add_common(e)
    return parser


def cmd_featurize(args) -> int:
    try:
        config = PipelineConfig(
            inputs=args.input, output=args.output, format=args.format, epsilon=args.epsilon,
            squash=not args.no_squash, max_bodies=args.max_bodies, min_frames=args.min_frames,
            threads=args.threads, seed=args.seed,
        )
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    paths = expand_inputs(config.inputs)
    if not paths:
        log.error("no input files found")
        return EXIT_INPUT
    for path in paths:
        try:
            dest = featurize_file(path, config)
        except (SkeletonParseError, OSError, ValueError) as exc:
            log.error("%s: %s", path, exc)
            if not args.skip_bad:
                return EXIT_INPUT
            continue
        if dest is not None:
            print(f"{path} -> {dest}")
    return EXIT_OK


def cmd_verify(args) -> int:
    defaults = VERIFY_DEFAULTS[args.mode]
    trials = args.trials if args.trials is not None else defaults["trials"]
    tol = args.tol if args.tol is not None else defaults["tol"]
    try:
        if args.mode == "analytic":
            report = verify.check_invariance_analytic(trials=trials, seed=args.seed, tol=tol, threads=args.threads)
        elif args.mode == "spline":
            report = verify.check_invariance_spline(
                trials=trials, seed=args.seed, samples=args.samples, tol=tol, threads=args.threads
            )
        else:
            report = verify.negative_control(
                trials=trials, seed=args.seed, time_scale=args.time_scale, threshold=tol, threads=args.threads
            )
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    print(report.to_json() if args.json else report.to_text())
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_enumerate(args) -> int:
    try:
        specs = enumerate_specs(args.max_degree, args.max_order)
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    summary = count_summary(specs)
    if args.json:
        summary["specs"] = [str(s) for s in specs]
        print(json.dumps(summary, sort_keys=True))
        return EXIT_OK
    for spec in specs:
        name = match_stdadi(spec)
        print(f"{str(spec):<24} {name or ''}".rstrip())
    by_degree = ", ".join(f"degree {k}: {v}" for k, v in summary["by_degree"].items())
    print(f"count={summary['count']} ({by_degree or 'none'})")
    print(f"reference count={REFERENCE_COUNT}")
    print(f"fixed features present: {len(summary['stdadi_matches'])}/8")
    if summary["count"] != REFERENCE_COUNT:
        print(COUNT_NOTE.format(reference=REFERENCE_COUNT))
    return EXIT_OK


COMMANDS = {"featurize": cmd_featurize, "verify": cmd_verify, "enumerate": cmd_enumerate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if args.threads < 1:
        log.error("--threads must be >= 1")
        return EXIT_INPUT
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
