"""Key-value QPS and hit rate: every device, then every policy, at both value sizes.

    python scripts/kv.py [--sizes 216,532] [--ops N] [--out results.json]
"""
import argparse
import sys

from cxlssdsim.cache import PolicyKind
from cxlssdsim.cli import emit_report, sweep
from cxlssdsim.config import RunConfig
from cxlssdsim.devices import DeviceKind


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="216,532")
    ap.add_argument("--ops", type=int, default=10_000)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out")
    args = ap.parse_args(argv)
    reports = []
    for size in (int(s) for s in args.sizes.split(",")):
        cfg = RunConfig().with_overrides(kind="kv", value_size=size, op_count=args.ops)
        for axis, values in (("device", [d.value for d in DeviceKind if not d.cached]),
                             ("policy", [p.value for p in PolicyKind])):
            res = sweep(cfg, axis, values, jobs=args.jobs)
            print(f"\n== value size {size} B, {axis} sweep")
            print(res.table)
            reports += res.reports
    if args.out:
        emit_report(reports, args.out, "json")


if __name__ == "__main__":
    sys.exit(main())
