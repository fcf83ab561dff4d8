"""Command line: ``plotkit render --csv PATH --series tag1,tag2 --out PATH``."""

from __future__ import annotations

import argparse
import sys

from plotkit.bands import SchemaError
from plotkit.render import PlotSpec, render


def _build_parser():
    parser = argparse.ArgumentParser(prog="plotkit", description="Experiment-CSV figure renderer.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render mean curves with ±1 std bands")
    p.add_argument("--csv", required=True, nargs="+", help="experiment CSV file(s)")
    p.add_argument("--summary", default=None, help="summary CSV to cross-check band edges against")
    p.add_argument("--series", required=True, help="comma-separated estimator tags")
    p.add_argument("--out", required=True, help="output image (.svg default; .png for raster)")
    p.add_argument("--logx", action="store_true")
    p.add_argument("--logy", action="store_true")
    p.add_argument("--title", default="")
    p.add_argument("--xlabel", default="t")
    p.add_argument("--ylabel", default="diameter")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 2
    series = [s for s in (t.strip() for t in args.series.split(",")) if s]
    spec = PlotSpec(
        csv_paths=list(args.csv),
        series=series,
        out_path=args.out,
        summary_path=args.summary,
        logx=args.logx,
        logy=args.logy,
        title=args.title,
        xlabel=args.xlabel,
        ylabel=args.ylabel,
    )
    try:
        render(spec)
    except (SchemaError, ValueError, FileNotFoundError) as exc:
        print(f"plotkit: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
