"""STREAM-style bandwidth per device and per kernel.

    python scripts/bandwidth.py [--footprint BYTES] [--out results.csv]
"""
import argparse
import sys

from cxlssdsim.cli import emit_report, sweep
from cxlssdsim.config import RunConfig
from cxlssdsim.workloads import MiB


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--footprint", type=int, default=2 * MiB, help="bytes per array")
    ap.add_argument("--devices", default="dram,cxl-dram,pmem,cxl-ssd-cached,cxl-ssd")
    ap.add_argument("--out")
    args = ap.parse_args(argv)
    cfg = RunConfig().with_overrides(kind="stream", footprint=args.footprint)
    res = sweep(cfg, "device", args.devices.split(","))
    print(f"{'device':16s}" + "".join(f"{k:>12s}" for k in ("copy", "scale", "add", "triad")))
    for rep in res.reports:
        label = rep.config["device"]
        cells = "".join(f"{p.bandwidth_mb_s:12.1f}" for p in rep.phases)
        print(f"{label:16s}{cells}   MB/s")
    if args.out:
        emit_report(res.reports, args.out, "csv")


if __name__ == "__main__":
    sys.exit(main())
