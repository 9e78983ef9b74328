"""Command-line entry point: one figure per invocation.

Usage: figure-kit --in data.csv [--in more.csv] --out fig.png --kind bias_h
"""

from __future__ import annotations

import argparse
import sys

from .render import FIGURE_KINDS, EmptyInputError, FigureSpec, MissingColumnError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="figure-kit")
    parser.add_argument("--in", dest="inputs", action="append", required=True,
                        help="input CSV path (repeatable)")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--kind", choices=FIGURE_KINDS, required=True)
    parser.add_argument("--log-eps", action="store_true",
                        help="format epsilon tick labels for a log grid")
    parser.add_argument("--title", default="")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    spec = FigureSpec(inputs=args.inputs, kind=args.kind, out=args.out,
                      log_eps=args.log_eps, title=args.title)
    try:
        render(spec)
    except (MissingColumnError, EmptyInputError, OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
