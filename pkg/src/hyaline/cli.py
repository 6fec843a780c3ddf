"""Command-line front end: `smr bench` and `smr oracle`."""

from __future__ import annotations

import argparse
import sys

from . import SCHEME_NAMES
from . import bench as bench_mod
from . import oracle as oracle_mod


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="smr",
        description="Reference-counted retirement-list memory reclamation: "
                    "benchmarks and an exhaustive interleaving oracle.")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="run one benchmark configuration")
    b.add_argument("--scheme", choices=SCHEME_NAMES, default="hyaline")
    b.add_argument("--ds", choices=bench_mod.STRUCTURES, default="hashmap",
                   help="data structure under test")
    b.add_argument("--workload", choices=bench_mod.WORKLOADS, default="write")
    b.add_argument("--threads", type=int, default=8)
    b.add_argument("--duration", type=float, default=10.0,
                   metavar="SEC")
    b.add_argument("--prefill", type=int, default=50_000)
    b.add_argument("--key-range", type=int, default=100_001)
    b.add_argument("--slots", type=int, default=None,
                   help="slot count (default: threads rounded up to a "
                        "power of two, capped at %d)" % bench_mod.SLOT_CAP)
    b.add_argument("--batch-min", type=int, default=64)
    b.add_argument("--freq", type=int, default=150,
                   help="allocations per thread between era increments")
    b.add_argument("--threshold", type=int, default=8192,
                   help="unacknowledged insertions before a slot is avoided")
    b.add_argument("--epochf", type=int, default=150)
    b.add_argument("--emptyf", type=int, default=120)
    b.add_argument("--stall", type=int, default=0, metavar="M",
                   help="number of workers that enter, dereference once, "
                        "then sleep forever")
    b.add_argument("--seed", type=int, default=1)
    b.add_argument("--csv", default=None, metavar="PATH",
                   help="append the result row to this CSV file")

    o = sub.add_parser("oracle",
                       help="exhaustively check a bounded scenario")
    o.add_argument("--variant", choices=oracle_mod.VARIANTS,
                   default="hyaline")
    o.add_argument("--threads", type=int, default=2)
    o.add_argument("--slots", type=int, default=1)
    o.add_argument("--batches", type=int, default=1)
    o.add_argument("--stall", action="store_true",
                   help="check the stalled-reader scenario instead "
                        "(era-validated shared-slot variant)")
    o.add_argument("--bug", choices=oracle_mod.BUGS, default=None,
                   help="plant a deliberate model mutation (expects a "
                        "violation witness)")
    o.add_argument("--max-states", type=int, default=1_000_000)
    return parser


def _cmd_bench(args):
    config = bench_mod.BenchConfig(
        scheme=args.scheme, structure=args.ds, workload=args.workload,
        threads=args.threads, duration=args.duration, prefill=args.prefill,
        key_range=args.key_range, slots=args.slots,
        batch_min=args.batch_min, freq=args.freq, threshold=args.threshold,
        epochf=args.epochf, emptyf=args.emptyf, stall=args.stall,
        seed=args.seed, csv=args.csv)
    record = bench_mod.run(config)
    print(f"{config.scheme} {config.structure} {config.workload} "
          f"threads={config.threads} ops={record.ops_total} "
          f"throughput={record.throughput:.0f}/s "
          f"unreclaimed_final={record.unreclaimed_final} "
          f"reader_free_fraction={record.reader_free_fraction:.3f}")
    if record.stalled_acks:
        print("stalled slot acks: " + ", ".join(
            f"slot {s}: {a}" for s, a in sorted(record.stalled_acks.items())))
    if config.csv:
        bench_mod.emit_csv([record], config.csv)
    if record.abort:
        print(f"SAFETY ABORT: {record.abort}", file=sys.stderr)
        return 1
    return 0


def _cmd_oracle(args):
    if args.stall:
        scenario = oracle_mod.stalled_reader_scenario(bug=args.bug)
    else:
        scenario = oracle_mod.basic_scenario(
            args.variant, args.threads, args.slots, args.batches,
            bug=args.bug)
    try:
        verdict = oracle_mod.explore(scenario, max_states=args.max_states)
    except oracle_mod.OracleOverflow as exc:
        print(f"ABORT: {exc}", file=sys.stderr)
        return 2
    print(verdict.summary())
    return 0 if verdict.ok else 1


def main(argv=None):
    args = _build_parser().parse_args(argv)
    if args.command == "bench":
        return _cmd_bench(args)
    return _cmd_oracle(args)


if __name__ == "__main__":
    sys.exit(main())
