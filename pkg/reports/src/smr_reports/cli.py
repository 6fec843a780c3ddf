"""Command-line chart renderer for benchmark CSV."""

import argparse
import sys

from .plotting import METRIC_COLUMNS, ChartSpec, InputError, render


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="smr-plot",
        description="Plot benchmark CSV: one panel per structure/workload "
                    "pair, one line per scheme, thread count on the x-axis.")
    parser.add_argument("--csv", action="append", required=True,
                        metavar="PATH", dest="csv_paths",
                        help="input CSV (repeatable)")
    parser.add_argument("--metric", choices=sorted(METRIC_COLUMNS),
                        default="throughput")
    parser.add_argument("--out", required=True, metavar="DIR",
                        help="output directory for PNG and SVG")
    args = parser.parse_args(argv)

    try:
        outputs = render(ChartSpec(csv_paths=args.csv_paths,
                                   metric=args.metric, out_dir=args.out))
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in outputs:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
