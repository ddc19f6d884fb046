"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

The lines are collected in ``RESULTS`` and shown in the terminal summary.
"""
import contextlib
import random
import time

import pytest
from hypothesis import given, settings, strategies as st

from cxlssdsim.cache import CacheGeometry, DramCache, Hit, PolicyKind
from cxlssdsim.cli import report_json, run, sweep
from cxlssdsim.config import RunConfig
from cxlssdsim.devices import DeviceKind
from cxlssdsim.protocol import CxlFlit, CxlTxn, MetaValue, decode_flit, encode_flit, encode_header
from cxlssdsim.system import SystemConfig, simulate
from cxlssdsim.workloads import MiB, WorkloadSpec, build_trace

from helpers import make_trace, reads
from oracle import ReferenceCache

RESULTS = {}
PAGE = 4096
ALL_DEVICES = [d.value for d in DeviceKind]


@contextlib.contextmanager
def criterion(number, title):
    notes = []
    t0 = time.perf_counter()
    try:
        yield notes
    except BaseException:
        RESULTS[number] = f"[{number:2d}] FAIL  {title}  " + "; ".join(notes)
        raise
    elapsed = time.perf_counter() - t0
    RESULTS[number] = f"[{number:2d}] PASS  {title}  ({elapsed:.1f} s) " + "; ".join(notes)


def kv_config(value_size, **kw):
    return RunConfig().with_overrides(kind="kv", value_size=value_size, **kw)


@pytest.fixture(scope="module")
def kv_216_policies():
    t0 = time.perf_counter()
    res = sweep(kv_config(216), "policy", [p.value for p in PolicyKind])
    return res, time.perf_counter() - t0


@pytest.fixture(scope="module")
def kv_devices():
    """Per value size: report for every device (cached with LRU)."""
    out = {}
    for size in (216, 532):
        res = sweep(kv_config(size), "device", ALL_DEVICES)
        out[size] = dict(zip(ALL_DEVICES, res.reports))
    return out


def test_c01_cached_hit_latency_is_exact():
    with criterion(1, "cached hit latency is exactly 100 ns") as notes:
        t0 = time.perf_counter()
        spec = WorkloadSpec(kind="randlat", footprint=8 * MiB, op_count=5000, warmup=True, seed=1)
        rep = simulate(build_trace(spec), SystemConfig())
        elapsed = time.perf_counter() - t0
        notes.append(f"min {rep.latency_min_ns} max {rep.latency_max_ns} over {rep.requests} reads")
        assert rep.requests == 5000
        assert rep.latency_min_ns == rep.latency_max_ns == 100
        assert rep.hit_rate == 1.0
        assert elapsed < 1.0, f"took {elapsed:.2f} s"


def test_c02_cxl_surcharge_is_exact():
    with criterion(2, "CxlDram - Dram mean latency = 50 ns") as notes:
        rng = random.Random(2)
        traces = [
            build_trace(WorkloadSpec(kind="randlat", op_count=3000, seed=4)),
            reads([rng.randrange(1 << 20) * 64 for _ in range(3000)]),  # pipelined
            reads([i * 64 for i in range(500)], barrier=True),
        ]
        for tr in traces:
            dram = simulate(tr, SystemConfig(device=DeviceKind.DRAM, policy=None))
            cxl = simulate(tr, SystemConfig(device=DeviceKind.CXL_DRAM, policy=None))
            diff = cxl.latency_mean_ns - dram.latency_mean_ns
            notes.append(f"{diff:g}")
            assert diff == 50


def test_c03_device_ordering():
    with criterion(3, "Dram < CxlDram < Pmem < CxlSsdCached < CxlSsd") as notes:
        t0 = time.perf_counter()
        cfg = RunConfig().with_overrides(kind="randlat", op_count=100_000, footprint=64 * MiB)
        order = ["dram", "cxl-dram", "pmem", "cxl-ssd-cached", "cxl-ssd"]
        res = sweep(cfg, "device", order)
        means = [r.latency_mean_ns for r in res.reports]
        elapsed = time.perf_counter() - t0
        notes.append(" < ".join(f"{m:.0f}" for m in means))
        assert all(a < b for a, b in zip(means, means[1:]))
        assert means[4] >= 100 * means[1]
        assert elapsed < 30, f"took {elapsed:.1f} s"


def test_c04_cache_speedup(kv_devices):
    with criterion(4, "KV 216 B: cached/uncached QPS >= 5") as notes:
        r = kv_devices[216]
        ratio = r["cxl-ssd-cached"].qps / r["cxl-ssd"].qps
        notes.append(f"ratio {ratio:.0f}x")
        assert ratio >= 5


def test_c05_lru_best_hit_rate(kv_216_policies):
    with criterion(5, "KV 216 B: LRU hit rate >= every other policy") as notes:
        res, elapsed = kv_216_policies
        rates = {r.config["policy"]: r.hit_rate for r in res.reports}
        notes.append(" ".join(f"{k} {v:.4f}" for k, v in rates.items()))
        notes.append(f"sweep {elapsed:.1f} s")
        assert all(rates["lru"] >= v for v in rates.values())
        assert elapsed < 60, f"sweep took {elapsed:.1f} s"


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 4_000_000 - 1), st.permutations(range(64)),
       st.lists(st.integers(0, 4_000_000 - 1), max_size=4))
def _coalescing_case(page, order, noise_pages):
    # noise: other pages warmed first so the target set is not empty
    ops = [(p * PAGE, False) for p in noise_pages if p != page]
    ops += [(page * PAGE + i * 64, False) for i in order]
    warm = len(ops) - 64
    rep = simulate(make_trace(ops, warmup=warm), SystemConfig(max_outstanding=64))
    assert rep.ssd_page_reads == 1


def test_c06_mshr_coalescing():
    with criterion(6, "64 reads of one cold page -> 1 SSD page read") as notes:
        rep = simulate(reads([i * 64 for i in range(64)]), SystemConfig())
        notes.append(f"{rep.ssd_page_reads} read, {rep.mshr_coalesced} coalesced")
        assert rep.ssd_page_reads == 1
        _coalescing_case()


@settings(max_examples=1000, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 95), st.integers(0, 63), st.booleans()),
                min_size=1, max_size=150),
       st.sampled_from(list(PolicyKind)), st.booleans(), st.booleans())
def _writeback_case(ops, policy, barrier, read_only):
    if read_only:
        ops = [(p, ln, False) for p, ln, _ in ops]
    trace = make_trace([(p * PAGE + ln * 64, w) for p, ln, w in ops], barrier=barrier)
    cfg = SystemConfig(policy=policy, cache=CacheGeometry(16 * PAGE, ways=4), mshr_entries=8)
    rep = simulate(trace, cfg)
    assert rep.ssd_page_programs == rep.dirty_evictions + rep.flush_writebacks
    if read_only:
        assert rep.ssd_page_programs == 0


def test_c07_writeback_accounting():
    with criterion(7, "SSD programs = dirty evictions + flush writebacks") as notes:
        _writeback_case()
        notes.append("1000 random traces")


def test_c08_policy_oracle():
    with criterion(8, "hit/miss sequences match the brute-force reference") as notes:
        for policy in PolicyKind:
            for pages, ways in ((16, 8), (16, 4), (8, 8)):
                rng = random.Random(f"{policy.value}-{pages}-{ways}")
                trace = [rng.randrange(3 * pages) for _ in range(10_000)]
                cache = DramCache(CacheGeometry(pages * PAGE, ways=ways), policy)
                ref = ReferenceCache(policy.value, pages, ways)
                got = [isinstance(cache.access(p * PAGE), Hit) for p in trace]
                want = [ref.access(p) for p in trace]
                assert got == want, f"{policy.value} diverges at access {next(i for i, (a, b) in enumerate(zip(got, want)) if a != b)}"
        notes.append("5 policies x 3 geometries x 10k accesses")


def test_c09_determinism():
    with criterion(9, "same config and seed -> byte-identical JSON") as notes:
        for kind, dev in (("kv", "cxl-ssd-cached"), ("stream", "cxl-ssd-cached"),
                          ("randlat", "pmem")):
            cfg = RunConfig().with_overrides(kind=kind, device=dev, op_count=500, seed=77,
                                             footprint=None if kind != "stream" else 64 * 1024)
            assert report_json(run(cfg)).encode() == report_json(run(cfg)).encode()
        notes.append("kv, stream, randlat")


def test_c10_value_size_degradation(kv_devices):
    with criterion(10, "532 B is slower and misses more than 216 B") as notes:
        small, large = kv_devices[216], kv_devices[532]
        for dev in ALL_DEVICES:
            notes.append(f"{dev} {small[dev].qps:.0f}>{large[dev].qps:.0f}")
            assert large[dev].qps < small[dev].qps, dev
        h216, h532 = small["cxl-ssd-cached"].hit_rate, large["cxl-ssd-cached"].hit_rate
        notes.append(f"hit {h216:.4f}>{h532:.4f}")
        assert h532 < h216


def test_c11_flit_codec():
    with criterion(11, "flit codec round-trip is identity; header is 64 B") as notes:
        rng = random.Random(11)
        cases = 0
        for txn in CxlTxn:
            metas = list(MetaValue) if txn.host_to_device else [None]
            for meta in metas:
                for _ in range(1250):
                    lba = rng.randrange(2**48)
                    nlb = rng.randrange(1, 16)
                    addr = lba * PAGE + rng.randrange(nlb * PAGE)
                    data = rng.randbytes(64) if txn.carries_data else None
                    flit = CxlFlit(txn, addr, meta, lba, nlb, rng.randrange(2**32), data)
                    assert len(encode_header(flit)) == 64
                    assert decode_flit(encode_flit(flit)) == flit
                    cases += 1
        notes.append(f"{cases} cases")
        assert cases >= 10_000
