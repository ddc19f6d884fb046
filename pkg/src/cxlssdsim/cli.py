"""Command line front end: single runs, device/policy sweeps, report output.

Exit codes: 0 success, 2 configuration error, 3 simulation fault, 4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .cache import PolicyKind
from .config import RunConfig, config_from_dict, parse_config, sweep_variant
from .devices import DeviceKind
from .errors import ConfigError, SimulationError, TraceParseError
from .stats import StatsReport
from .system import Simulator
from .workloads import RequestTrace, build_trace

log = logging.getLogger("cxlssdsim")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SIMULATION = 3
EXIT_IO = 4

SWEEP_AXES = {
    "device": [d.value for d in DeviceKind],
    "policy": [p.value for p in PolicyKind],
}

CSV_COLUMNS = (
    "label", "device", "policy", "workload", "value_size", "requests", "reads", "writes",
    "latency_min_ns", "latency_mean_ns", "latency_p50_ns", "latency_p95_ns", "latency_p99_ns",
    "latency_max_ns", "bandwidth_mb_s", "qps", "hit_rate", "cache_hits", "cache_misses",
    "mshr_coalesced", "mshr_stalls", "ssd_page_reads", "ssd_page_programs", "dirty_evictions",
    "flush_writebacks", "read_amplification", "write_amplification", "simulated_ns",
)
NA = "na"


def run(config: RunConfig, trace: Optional[RequestTrace] = None) -> StatsReport:
    """Replay one workload on one device, flushing the cache at the end."""
    if trace is None:
        trace = build_trace(config.workload)
    report = Simulator(config.system_config()).replay(trace, flush=True)
    report.config = config.to_dict()
    return report


def _run_packed(args):
    return run(*args)


class SweepError(SimulationError):
    def __init__(self, value, cause, partial):
        super().__init__(f"sweep run {value!r} failed: {cause}")
        self.value = value
        self.cause = cause
        self.partial = partial


@dataclass
class SweepResult:
    axis: str
    values: list
    reports: list = field(default_factory=list)

    @property
    def table(self) -> str:
        return comparison_table(self.reports, self.values)


def sweep(config: RunConfig, axis: str, values: Sequence[str], jobs: int = 1) -> SweepResult:
    """One run per value over a single shared trace; reports follow ``values`` order."""
    values = list(values)
    if not values:
        raise ConfigError("sweep", "no values to sweep over")
    configs = [sweep_variant(config, axis, v) for v in values]
    trace = build_trace(config.workload)
    result = SweepResult(axis, values)
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            futures = [pool.submit(_run_packed, (c, trace)) for c in configs]
            for value, fut in zip(values, futures):
                try:
                    result.reports.append(fut.result())
                except SimulationError as exc:
                    raise SweepError(value, exc, result.reports) from exc
        return result
    for value, cfg in zip(values, configs):
        try:
            result.reports.append(run(cfg, trace))
        except SimulationError as exc:
            raise SweepError(value, exc, result.reports) from exc
    return result


def _label(report: StatsReport) -> str:
    cfg = report.config or {}
    label = cfg.get("device", "?")
    if cfg.get("policy"):
        label += f"/{cfg['policy']}"
    return label


def _fmt(value, spec=".1f"):
    return NA if value is None else format(value, spec)


def comparison_table(reports, values=None) -> str:
    header = ("run", "mean ns", "p99 ns", "MB/s", "QPS", "hit rate", "ssd rd", "ssd wr")
    rows = [header]
    for rep in reports:
        rows.append((
            _label(rep), _fmt(rep.latency_mean_ns), _fmt(rep.latency_p99_ns),
            _fmt(rep.bandwidth_mb_s), _fmt(rep.qps, ".0f"), _fmt(rep.hit_rate, ".4f"),
            str(rep.ssd_page_reads), str(rep.ssd_page_programs),
        ))
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(r, widths)))
             for r in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def csv_row(report: StatsReport) -> list:
    cfg = report.config or {}
    data = report.to_dict()
    extra = {
        "label": _label(report),
        "device": cfg.get("device"),
        "policy": cfg.get("policy"),
        "workload": (cfg.get("workload") or {}).get("kind"),
        "value_size": (cfg.get("workload") or {}).get("value_size"),
    }
    row = []
    for col in CSV_COLUMNS:
        value = extra[col] if col in extra else data[col]
        row.append(NA if value is None else value)
    return row


def report_json(reports) -> str:
    if isinstance(reports, StatsReport):
        doc = reports.to_dict()
    else:
        doc = [r.to_dict() for r in reports]
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def report_csv(reports) -> str:
    if isinstance(reports, StatsReport):
        reports = [reports]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rep in reports:
        w.writerow(csv_row(rep))
    return buf.getvalue()


def emit_report(reports, path, fmt: str = "json") -> None:
    """Write one report or a list of reports as JSON or CSV."""
    if fmt == "json":
        text = report_json(reports)
    elif fmt == "csv":
        text = report_csv(reports)
    else:
        raise ConfigError("format", f"unknown format {fmt!r}")
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


def load_report(text: str):
    doc = json.loads(text)
    if isinstance(doc, list):
        return [StatsReport.from_dict(d) for d in doc]
    return StatsReport.from_dict(doc)


# -- argument handling -----------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cxlssdsim",
        description="Simulate a CXL.mem SSD memory expander with a DRAM page cache.")
    p.add_argument("--config", help="JSON configuration document")
    p.add_argument("--device", choices=SWEEP_AXES["device"])
    p.add_argument("--policy", choices=SWEEP_AXES["policy"])
    p.add_argument("--workload", dest="kind", choices=["stream", "randlat", "kv", "trace"])
    p.add_argument("--seed", type=int)
    p.add_argument("--output", help="report path (stdout when omitted)")
    p.add_argument("--format", choices=["json", "csv"])
    p.add_argument("--sweep", choices=sorted(SWEEP_AXES), help="sweep one axis")
    p.add_argument("--values", help="comma-separated sweep values (default: all)")
    p.add_argument("--ops", dest="op_count", type=int, help="operation count")
    p.add_argument("--footprint", type=int, help="workload footprint in bytes")
    p.add_argument("--value-size", dest="value_size", type=int, choices=[216, 532])
    p.add_argument("--trace", dest="trace_path", help="trace file (implies --workload trace)")
    p.add_argument("--warmup", action="store_true", default=None,
                   help="prepend one read per page of the footprint, excluded from stats")
    p.add_argument("--jobs", type=int, default=1, help="parallel sweep runs")
    p.add_argument("--table", action="store_true", help="print a comparison table to stderr")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _load_config(args) -> RunConfig:
    base = RunConfig()
    if args.config:
        with open(args.config) as fh:
            base = parse_config(fh.read())
    if args.trace_path and not args.kind:
        args.kind = "trace"
    overrides = {k: getattr(args, k) for k in
                 ("device", "policy", "seed", "output", "format", "kind", "op_count",
                  "footprint", "value_size", "trace_path", "warmup")}
    return base.with_overrides(**overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _load_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        if args.sweep:
            values = args.values.split(",") if args.values else SWEEP_AXES[args.sweep]
            result = sweep(cfg, args.sweep, values, jobs=args.jobs)
            reports = result.reports
            table = result.table
        else:
            reports = run(cfg)
            table = comparison_table([reports])
        emit_report(reports, cfg.output, cfg.format)
        if args.table or args.sweep:
            print(table, file=sys.stderr)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TraceParseError as exc:
        print(f"trace error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SweepError as exc:
        print(f"simulation fault: {exc}", file=sys.stderr)
        if cfg.output and exc.partial:
            try:
                emit_report(exc.partial, cfg.output, cfg.format)
                print(f"partial results ({len(exc.partial)} runs) saved to {cfg.output}",
                      file=sys.stderr)
            except OSError:
                pass
        return EXIT_SIMULATION
    except SimulationError as exc:
        print(f"simulation fault: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
