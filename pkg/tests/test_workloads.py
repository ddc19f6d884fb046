import pytest
from hypothesis import given, settings, strategies as st

from cxlssdsim.errors import TraceParseError
from cxlssdsim.protocol import RequestKind
from cxlssdsim.rng import Xoshiro256, splitmix64
from cxlssdsim.workloads import (DEFAULT_CXL_BASE, WorkloadSpec, build_trace, parse_trace,
                                 read_trace, write_trace)

BASE = DEFAULT_CXL_BASE


def test_xoshiro_reference_vector():
    rng = Xoshiro256(state=[1, 2, 3, 4])
    assert [rng.next_u64() for _ in range(10)] == [
        11520, 0, 1509978240, 1215971899390074240, 1216172134540287360,
        607988272756665600, 16172922978634559625, 8476171486693032832,
        10595114339597558777, 2904607092377533576]


def test_splitmix_reference_vector():
    # first outputs for seed 1234567
    s, outs = 1234567, []
    for _ in range(3):
        s, o = splitmix64(s)
        outs.append(o)
    assert outs == [6457827717110365317, 3203168211198807973, 9817491932198370423]


def test_rng_rejects_zero_state():
    with pytest.raises(ValueError):
        Xoshiro256(state=[0, 0, 0, 0])


@given(st.integers(0, 2**64 - 1), st.integers(1, 10**9))
def test_below_in_range(seed, n):
    rng = Xoshiro256(seed)
    assert all(0 <= rng.below(n) < n for _ in range(20))


def test_below_is_roughly_uniform():
    rng = Xoshiro256(1)
    counts = [0] * 10
    for _ in range(20_000):
        counts[rng.below(10)] += 1
    assert max(counts) - min(counts) < 400


def test_stream_example():
    tr = build_trace(WorkloadSpec(kind="stream", footprint=128))
    ops = [("W" if r.kind is RequestKind.WRITE else "R", r.addr - BASE) for r in tr.requests]
    a, b, c = 0, 128, 256
    assert ops == [
        ("R", a), ("W", c), ("R", a + 64), ("W", c + 64),              # copy
        ("R", c), ("W", b), ("R", c + 64), ("W", b + 64),              # scale
        ("R", a), ("R", b), ("W", c), ("R", a + 64), ("R", b + 64), ("W", c + 64),  # add
        ("R", b), ("R", c), ("W", a), ("R", b + 64), ("R", c + 64), ("W", a + 64),  # triad
    ]
    assert [p.name for p in tr.phases] == ["copy", "scale", "add", "triad"]
    assert [p.end - p.start for p in tr.phases] == [4, 4, 6, 6]


def test_stream_rejects_tiny_footprint():
    with pytest.raises(ValueError):
        build_trace(WorkloadSpec(kind="stream", footprint=32))


def test_randlat_is_dependent_and_in_range():
    spec = WorkloadSpec(kind="randlat", footprint=1 << 20, op_count=500, seed=3)
    tr = build_trace(spec)
    assert len(tr) == 500 and all(tr.barrier)
    assert all(BASE <= r.addr < BASE + (1 << 20) and r.addr % 64 == 0 for r in tr.requests)


def test_randlat_warmup_touches_every_page_once():
    spec = WorkloadSpec(kind="randlat", footprint=64 * 4096, op_count=10, warmup=True)
    tr = build_trace(spec)
    assert tr.warmup == 64
    assert sorted({r.addr // 4096 for r in tr.requests[:64]}) == [BASE // 4096 + i for i in range(64)]


@pytest.mark.parametrize("kind", ["stream", "randlat", "kv"])
def test_same_seed_same_trace(kind):
    spec = WorkloadSpec(kind=kind, op_count=300, footprint=None if kind != "stream" else 4096,
                        kv_prefill_keys=100)
    assert build_trace(spec).to_bytes() == build_trace(spec).to_bytes()


def test_different_seed_different_trace():
    a = build_trace(WorkloadSpec(kind="randlat", op_count=50, seed=1))
    b = build_trace(WorkloadSpec(kind="randlat", op_count=50, seed=2))
    assert a.to_bytes() != b.to_bytes()


@pytest.mark.parametrize("size,lines", [(216, 4), (532, 9)])
def test_kv_record_lines(size, lines):
    spec = WorkloadSpec(kind="kv", value_size=size, op_count=50, kv_prefill_keys=0)
    tr = build_trace(spec)
    names = [p.name for p in tr.phases]
    assert names == ["insert", "query", "update", "delete"]
    ins = tr.phases[0]
    assert ins.ops == 50
    assert ins.end - ins.start == 50 * (1 + lines)
    upd = tr.phases[2]
    assert upd.end - upd.start == 50 * (1 + 2 * lines)
    assert tr.phases[3].end - tr.phases[3].start == 50


def test_kv_records_never_straddle_pages():
    spec = WorkloadSpec(kind="kv", value_size=532, op_count=200, kv_prefill_keys=0)
    tr = build_trace(spec)
    ins = tr.phases[0]
    reqs = tr.requests[ins.start:ins.end]
    for k in range(200):
        rec = reqs[k * 10 + 1:k * 10 + 10]
        assert len({r.addr // 4096 for r in rec}) == 1


def test_kv_metadata_region_is_hot():
    spec = WorkloadSpec(kind="kv", op_count=200, kv_prefill_keys=0)
    tr = build_trace(spec)
    meta = [r for r in tr.requests if r.addr < BASE + spec.kv_metadata_bytes]
    assert len(meta) == 800


def test_kv_rejects_other_value_sizes():
    with pytest.raises(ValueError):
        build_trace(WorkloadSpec(kind="kv", value_size=100))


def test_trace_file_round_trip(tmp_path):
    tr = build_trace(WorkloadSpec(kind="randlat", op_count=20, footprint=8192))
    path = tmp_path / "t.trace"
    write_trace(tr, path)
    back = read_trace(path)
    assert [(r.addr, r.kind) for r in back.requests] == [(r.addr, r.kind) for r in tr.requests]


def test_parse_splits_large_accesses():
    tr = parse_trace("0 R 0x100000040 200\n# comment\n\n5 W 0x100000000 64\n")
    assert [r.addr for r in tr.requests] == [0x100000040 + 64 * i for i in range(4)] + [0x100000000]
    assert tr.requests[-1].issue_time == 5000
    assert tr.requests[-1].kind is RequestKind.WRITE


@pytest.mark.parametrize("line,reason", [
    ("0 X 0x40 64", "unknown op"),
    ("0 R 64 64", "0x-hex"),
    ("0 R 0x41 64", "aligned"),
    ("0 R 0x40", "4 fields"),
    ("abc R 0x40 64", "issue time"),
    ("0 R 0x40 0", "positive"),
])
def test_parse_errors_name_the_line(line, reason):
    with pytest.raises(TraceParseError) as info:
        parse_trace("0 R 0x0 64\n" + line)
    assert info.value.lineno == 2
    assert reason in str(info.value)
