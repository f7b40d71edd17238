"""Standalone render scripts.

`lawnviz-lawn` draws a saved lawn file onto a sphere projection;
`lawnviz-curve` plots a sweep CSV. Both exit 0 on success, 2 on invalid
input, and can also be invoked as `python -m lawnviz.cli {lawn,curve}`.
"""

from __future__ import annotations

import argparse
import sys

from .formats import FormatError
from .render import PROJECTIONS, RenderSpec, render_curve, render_lawn


def main_lawn(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="lawnviz-lawn",
        description="Render a saved lawn file as a PNG sphere map.")
    parser.add_argument("lawn", help="lawn JSON file")
    parser.add_argument("--grid", required=True, help="grid text file")
    parser.add_argument("--out", required=True, help="output PNG path")
    parser.add_argument("--projection", choices=PROJECTIONS, default="mollweide")
    parser.add_argument("--dpi", type=int, default=150)
    parser.add_argument("--dot-size", dest="dot_size", type=float, default=None,
                        help="marker area in points^2 (default: scaled to site count)")
    args = parser.parse_args(argv)
    spec = RenderSpec(lawn_path=args.lawn, grid_path=args.grid,
                      out_path=args.out, projection=args.projection,
                      dpi=args.dpi, dot_size=args.dot_size)
    try:
        render_lawn(spec)
    except (FormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def main_curve(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="lawnviz-curve",
        description="Plot the probability and gap curves of a sweep CSV.")
    parser.add_argument("csv", help="sweep CSV file")
    parser.add_argument("--out", required=True, help="output PNG path")
    parser.add_argument("--dpi", type=int, default=150)
    args = parser.parse_args(argv)
    try:
        render_curve(args.csv, args.out, dpi=args.dpi)
    except (FormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] not in ("lawn", "curve"):
        print("usage: python -m lawnviz.cli {lawn,curve} ...", file=sys.stderr)
        return 2
    return main_lawn(argv[1:]) if argv[0] == "lawn" else main_curve(argv[1:])


if __name__ == "__main__":
    sys.exit(main())
