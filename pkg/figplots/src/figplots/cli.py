"""figplots command line: `figplots plot <kind> <inputs...> --out <path>`.

Exit codes: 0 success, 2 on bad inputs (unknown kind, missing column,
empty CSV, unreadable file).
"""
from __future__ import annotations

import argparse
import sys

from .io import EmptyInputError, MissingColumnError
from .render import PLOT_KINDS, PlotJob, render


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="figplots", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    plot = sub.add_parser("plot", help="render one figure from emitted CSV/JSON files")
    plot.add_argument("kind", choices=PLOT_KINDS)
    plot.add_argument("inputs", nargs="+")
    plot.add_argument("--out", required=True, help="output image path")
    plot.add_argument("--columns", default=None,
                      help="comma-separated column names (curves/fidelity kinds)")
    plot.add_argument("--title", default=None)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    options = {}
    if args.columns:
        options["columns"] = [c for c in args.columns.split(",") if c]
    if args.title:
        options["title"] = args.title
    try:
        job = PlotJob(kind=args.kind, inputs=args.inputs, out=args.out, options=options)
        print(render(job))
        return 0
    except (MissingColumnError, EmptyInputError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
