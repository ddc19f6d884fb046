"""Mean/p99 latency of dependent random reads on every device.

    python scripts/latency.py [--ops N] [--footprint BYTES] [--out results.json]
"""
import argparse
import sys

from cxlssdsim.cli import emit_report, sweep
from cxlssdsim.config import RunConfig
from cxlssdsim.workloads import MiB


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ops", type=int, default=100_000)
    ap.add_argument("--footprint", type=int, default=64 * MiB)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--out")
    args = ap.parse_args(argv)
    cfg = RunConfig().with_overrides(kind="randlat", op_count=args.ops,
                                     footprint=args.footprint, seed=args.seed)
    res = sweep(cfg, "device", ["dram", "cxl-dram", "pmem", "cxl-ssd-cached", "cxl-ssd"])
    print(res.table)
    if args.out:
        emit_report(res.reports, args.out, "json")


if __name__ == "__main__":
    sys.exit(main())
