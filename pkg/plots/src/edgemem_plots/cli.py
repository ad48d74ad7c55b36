"""Command-line figure rendering: plot --kind <kind> --in <csv> --out <file>."""

from __future__ import annotations

import argparse
import sys

from edgemem_plots.render import FIGURE_KINDS, FigureSpec, RenderError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot",
        description="Render a figure from an edgemem analysis table")
    parser.add_argument("--kind", required=True, choices=FIGURE_KINDS)
    parser.add_argument("--in", dest="input_path", required=True,
                        help="input CSV produced by `edgemem analyze`")
    parser.add_argument("--out", dest="output_path", required=True)
    parser.add_argument("--format", dest="image_format", default=None,
                        choices=("svg", "png"),
                        help="defaults to the --out file extension, else svg")
    parser.add_argument("--quantity", default="integrity",
                        choices=("integrity", "coherent_info"),
                        help="sets the value-axis range for trace figures")
    parser.add_argument("--xlabel", default="")
    parser.add_argument("--ylabel", default="")
    parser.add_argument("--title", default="")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    fmt = args.image_format
    if fmt is None:
        suffix = args.output_path.rsplit(".", 1)
        fmt = suffix[1].lower() if len(suffix) == 2 and suffix[1].lower() in (
            "svg", "png") else "svg"
    try:
        spec = FigureSpec(
            input_path=args.input_path,
            kind=args.kind,
            output_path=args.output_path,
            image_format=fmt,
            quantity=args.quantity,
            xlabel=args.xlabel,
            ylabel=args.ylabel,
            title=args.title,
        )
        out = render(spec)
    except RenderError as exc:
        print(f"render error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
