"""Command line: figures rand <summary.csv> <out.png>
                 figures lambda <summary.csv> <eps> <out.png>

Exit codes: 0 success, 1 data/schema error, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys

from .render import SchemaError, read_summary, render_lambda_figure, render_rand_figure


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="figures", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_rand = sub.add_parser("rand", help="accuracy and perfect-recovery panels vs gap depth")
    p_rand.add_argument("summary", help="sweep summary CSV")
    p_rand.add_argument("out", help="output image path")

    p_lambda = sub.add_parser("lambda", help="minimal best-index threshold vs sample size")
    p_lambda.add_argument("summary", help="sweep summary CSV")
    p_lambda.add_argument("eps", type=float, help="gap depth to slice at")
    p_lambda.add_argument("out", help="output image path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        table = read_summary(args.summary)
        if args.command == "rand":
            render_rand_figure(table, args.out)
            print(f"wrote {args.out}")
        else:
            slope = render_lambda_figure(table, args.eps, args.out)
            print(f"wrote {args.out} (fitted slope {slope:.3f} per ln n)")
        return 0
    except (SchemaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
