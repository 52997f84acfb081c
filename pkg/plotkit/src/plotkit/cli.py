"""`sle-plotkit render --in F.csv --out F.png [--log] [--levels N] [--title T]`"""

from __future__ import annotations

import argparse
import sys

from .render import PlotSpec, RenderError, render


def run(argv) -> int:
    parser = argparse.ArgumentParser(prog="sle-plotkit")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render a grid CSV to a PNG contour plot")
    p.add_argument("--in", dest="input_csv", required=True)
    p.add_argument("--out", dest="output_png", required=True)
    p.add_argument("--log", action="store_true")
    p.add_argument("--levels", type=int, default=30)
    p.add_argument("--title", default="")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    spec = PlotSpec(
        input_csv=args.input_csv,
        output_png=args.output_png,
        log_scale=args.log,
        levels=args.levels,
        title=args.title,
    )
    try:
        render(spec)
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
