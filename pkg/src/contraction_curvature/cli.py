"""Command line interface: analyze, verify, sequence, example.

Exit codes: 0 when every verdict passes or is not applicable, 1 when a
consistency verdict fails, 2 on invalid input.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path
from typing import Optional, Sequence

from .analysis import AnalysisOptions, analyze
from .corpus import NAMED_PARAMS, default_corpus, named
from .curvature import EPS, N_MAX, STOP_WINDOW, defect_sequence
from .errors import ConvergenceWarning, DomainError, TruncationWarning
from .specfile import build_operator, emit_spec, parse_spec
from .verify import SUITES, run_suites

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _radii(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"radii must be comma-separated numbers: {text!r}") from None
    return values


def _read_spec(path: str) -> dict:
    text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    return parse_spec(text)


def _param(text: str) -> tuple[str, float]:
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        raise argparse.ArgumentTypeError(f"parameter value must be a number: {text!r}") from None


def _add_sequence_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n-max", type=int, default=N_MAX, help="cap on defect-sequence terms")
    p.add_argument("--eps", type=float, default=EPS, help="stop when a_{n-w} - a_n < eps")
    p.add_argument("--stop-window", type=int, default=STOP_WINDOW, help="window w of the stop rule")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="curvature", description="Curvature invariant of a contraction.")
    sub = parser.add_subparsers(dest="command", required=True)

    an = sub.add_parser("analyze", help="run every estimator and verdict on an operator spec")
    an.add_argument("spec", help="JSON spec file, or - for stdin")
    _add_sequence_flags(an)
    an.add_argument("--radii", type=_radii, default=[0.9, 0.99, 0.999])
    an.add_argument("--quad-points", type=int, default=4096)
    an.add_argument("--dilation-horizon", type=int, default=1000, help="0 disables the dilation estimator")
    an.add_argument("--csv", type=Path, default=None, help="write the defect sequence here")
    an.add_argument("--normalize", action="store_true", help="rescale dense parts with norm above 1")
    an.add_argument("--seed", type=int, default=0)
    an.add_argument("--reciprocity", action="store_true", help="add the affinity symmetry verdict")
    an.add_argument("--timing", action="store_true", help="include wall-clock timings (not deterministic)")

    ve = sub.add_parser("verify", help="run an invariant suite over the built-in corpus")
    ve.add_argument("suite", choices=SUITES + ("all",))
    ve.add_argument("--tolerance", type=float, default=None, help="override every tolerance")

    sq = sub.add_parser("sequence", help="print the defect sequence as CSV")
    sq.add_argument("spec", help="JSON spec file, or - for stdin")
    _add_sequence_flags(sq)

    ex = sub.add_parser("example", help="print a spec for a named operator or corpus entry")
    ex.add_argument("name", nargs="?", help="builder name or corpus entry")
    ex.add_argument("--param", type=_param, action="append", default=[], metavar="KEY=VALUE")
    ex.add_argument("--list", action="store_true", help="list builders and corpus entries")
    return parser


def cmd_analyze(args) -> int:
    spec = _read_spec(args.spec)
    opts = AnalysisOptions(n_max=args.n_max, eps=args.eps, window=args.stop_window, radii=args.radii,
                           quad_points=args.quad_points, dilation_horizon=args.dilation_horizon,
                           normalize=args.normalize, seed=args.seed, reciprocity=args.reciprocity,
                           timing=args.timing)
    report = analyze(spec, opts)
    if args.csv is not None:
        with args.csv.open("w", encoding="utf-8", newline="") as fh:
            report.sequence.to_csv(fh)
    print(json.dumps(report.payload, indent=2, sort_keys=True))
    return report.exit_code


def cmd_verify(args) -> int:
    status = EXIT_OK
    for result in run_suites(args.suite, args.tolerance):
        print(result.summary())
        for note in result.notes:
            print(f"  note: {note}")
        for check in result.checks:
            if not check.passed:
                print(f"  FAIL {check.entry}: {check.quantity} = {check.deviation:.3e} "
                      f"> {check.tolerance:.1e}")
        if not result.passed:
            status = EXIT_FAIL
    return status


def cmd_sequence(args) -> int:
    T = build_operator(_read_spec(args.spec))
    seq = defect_sequence(T, args.n_max, args.eps, args.stop_window)
    seq.to_csv(sys.stdout)
    if not seq.converged:
        print(f"warning: not converged after {seq.n_used} terms", file=sys.stderr)
    return EXIT_OK


def cmd_example(args) -> int:
    corpus = default_corpus()
    if args.list or not args.name:
        print("builders: " + ", ".join(NAMED_PARAMS))
        print("corpus: " + ", ".join(corpus))
        return EXIT_OK
    if args.name in corpus and not args.param:
        spec = corpus[args.name]
    else:
        spec = named(args.name, **dict(args.param))
    print(emit_spec(spec))
    return EXIT_OK


_COMMANDS = {"analyze": cmd_analyze, "verify": cmd_verify, "sequence": cmd_sequence, "example": cmd_example}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        warnings.simplefilter("default", ConvergenceWarning)
        try:
            return _COMMANDS[args.command](args)
        except (DomainError, OSError, ValueError, KeyError) as exc:
            print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
            return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
