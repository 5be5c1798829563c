"""plots <csv> --out DIR --kind curves|hist [filters]"""

from __future__ import annotations

import argparse
import sys

from .render import PlotJob, render
from .schema import SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots",
        description="Render figures from an orthotensor benchmark CSV",
    )
    parser.add_argument("csv", help="benchmark results CSV")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--kind", choices=("curves", "hist"), default="curves")
    parser.add_argument("--k", type=int, default=None, help="filter: tensor order")
    parser.add_argument("--d", type=int, default=None, help="filter: dimension")
    parser.add_argument("--r", type=int, default=None, help="filter: factor count")
    parser.add_argument("--noise-model", default=None, help="filter: noise model")
    parser.add_argument(
        "--sigma", type=float, default=None, help="filter: noise level"
    )
    parser.add_argument(
        "--linear", action="store_true", help="linear instead of log loss axis"
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    job = PlotJob(
        csv_path=args.csv,
        output_dir=args.out,
        kind=args.kind,
        k=args.k,
        d=args.d,
        r=args.r,
        noise_model=args.noise_model,
        sigma=args.sigma,
        log_scale=not args.linear,
    )
    try:
        written = render(job)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
