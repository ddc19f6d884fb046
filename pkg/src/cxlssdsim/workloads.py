"""Request trace generators and the text trace format.

A trace is the post-CPU-cache miss stream: 64 B reads and writes with an
optional barrier flag.  A request with ``barrier`` set is issued only after
every earlier request has completed, which is how dependent pointer chasing
and key-value operation boundaries are expressed.

Trace file grammar, one request per line::

    <issue_ns> <R|W> <0x-hex address> <size>    # comment
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .engine import ns
from .errors import TraceParseError
from .protocol import LINE_SIZE, PAGE_SIZE, MemRequest, RequestKind
from .rng import Xoshiro256, mix64

KiB = 2**10
MiB = 2**20
GiB = 2**30

DEFAULT_CXL_BASE = 4 * GiB
KV_VALUE_SIZES = (216, 532)
KV_PHASES = ("insert", "query", "update", "delete")


class WorkloadKind(str, Enum):
    STREAM = "stream"
    RANDLAT = "randlat"
    KV = "kv"
    TRACE = "trace"


DEFAULT_FOOTPRINT = {
    WorkloadKind.STREAM: 8 * MiB,
    WorkloadKind.RANDLAT: 64 * MiB,
}


@dataclass(frozen=True)
class WorkloadSpec:
    kind: WorkloadKind = WorkloadKind.RANDLAT
    footprint: Optional[int] = None  # per-array bytes for stream, region bytes for randlat
    op_count: int = 10_000  # per phase for kv
    value_size: int = 216
    seed: int = 42
    target_device_base: int = DEFAULT_CXL_BASE
    warmup: bool = False
    trace_path: Optional[str] = None
    kv_metadata_bytes: int = 64 * KiB
    kv_prefill_keys: int = 40_000
    kv_reuse: float = 0.2
    kv_reuse_window: int = 2048

    def __post_init__(self):
        object.__setattr__(self, "kind", WorkloadKind(self.kind))

    @property
    def effective_footprint(self) -> Optional[int]:
        if self.footprint is not None:
            return self.footprint
        return DEFAULT_FOOTPRINT.get(self.kind)


@dataclass(frozen=True)
class Phase:
    name: str
    start: int
    end: int  # exclusive request index
    ops: Optional[int] = None


@dataclass
class RequestTrace:
    requests: list
    barrier: list
    warmup: int = 0  # leading requests excluded from statistics
    phases: list = field(default_factory=list)

    def __len__(self):
        return len(self.requests)

    def lines(self):
        for req, bar in zip(self.requests, self.barrier):
            op = "W" if req.kind is RequestKind.WRITE else "R"
            yield f"{req.issue_time // 1000} {op} {req.addr:#x} {req.size}" + (" # barrier" if bar else "")

    def to_bytes(self) -> bytes:
        """Canonical image used to compare traces (includes payloads)."""
        out = bytearray()
        for req, bar in zip(self.requests, self.barrier):
            out += struct.pack("<QQB?Q", req.id, req.addr, req.kind is RequestKind.WRITE, bar,
                               req.issue_time)
            if req.payload is not None:
                out += req.payload
        for p in self.phases:
            out += f"{p.name}:{p.start}:{p.end}:{p.ops};".encode()
        return bytes(out) + struct.pack("<Q", self.warmup)


def payload_for(tag: int) -> bytes:
    return struct.pack("<Q", tag & 0xFFFFFFFFFFFFFFFF) * 8


class _Builder:
    def __init__(self):
        self.requests = []
        self.barrier = []
        self.phases = []

    def add(self, addr, write=False, barrier=False, issue_time=0):
        rid = len(self.requests)
        if write:
            req = MemRequest(rid, addr, RequestKind.WRITE, issue_time, payload_for(rid))
        else:
            req = MemRequest(rid, addr, RequestKind.READ, issue_time)
        self.requests.append(req)
        self.barrier.append(barrier)

    def phase(self, name, start, ops=None):
        self.phases.append(Phase(name, start, len(self.requests), ops))

    def build(self, warmup=0):
        return RequestTrace(self.requests, self.barrier, warmup, self.phases)


def _lines(footprint):
    return footprint // LINE_SIZE


def gen_stream(spec: WorkloadSpec) -> RequestTrace:
    """copy, scale, add and triad as sequential line sweeps over three arrays."""
    footprint = spec.effective_footprint
    if footprint < LINE_SIZE:
        raise ValueError(f"stream footprint must hold at least one {LINE_SIZE} B line")
    n = _lines(footprint)
    size = n * LINE_SIZE
    a, b, c = (spec.target_device_base + i * size for i in range(3))
    kernels = (
        ("copy", (a,), c),
        ("scale", (c,), b),
        ("add", (a, b), c),
        ("triad", (b, c), a),
    )
    t = _Builder()
    for name, srcs, dst in kernels:
        start = len(t.requests)
        for i in range(n):
            off = i * LINE_SIZE
            for j, src in enumerate(srcs):
                t.add(src + off, barrier=(i == 0 and j == 0))
            t.add(dst + off, write=True)
        t.phase(name, start)
    return t.build()


def _warmup_sweep(t: _Builder, base: int, footprint: int) -> int:
    for page in range(0, footprint, PAGE_SIZE):
        t.add(base + page)
    return len(t.requests)


def gen_randlat(spec: WorkloadSpec) -> RequestTrace:
    """Dependent chain of uniformly random line reads."""
    if spec.op_count < 1:
        raise ValueError("op_count must be at least 1")
    footprint = spec.effective_footprint
    n = _lines(footprint)
    if n < 1:
        raise ValueError("randlat footprint must hold at least one line")
    rng = Xoshiro256(spec.seed)
    t = _Builder()
    warm = _warmup_sweep(t, spec.target_device_base, footprint) if spec.warmup else 0
    base = spec.target_device_base
    for _ in range(spec.op_count):
        t.add(base + rng.below(n) * LINE_SIZE, barrier=True)
    t.phase("chase", warm)
    return t.build(warm)


class _KvLayout:
    """Address arithmetic for a log-structured store of fixed-size records.

    Records are padded to whole lines and never straddle a 4 KB page.
    """

    def __init__(self, spec: WorkloadSpec):
        self.lines = math.ceil(spec.value_size / LINE_SIZE)
        self.stride = self.lines * LINE_SIZE
        self.meta_base = spec.target_device_base
        self.meta_lines = spec.kv_metadata_bytes // LINE_SIZE
        if self.meta_lines < 1:
            raise ValueError("kv metadata region must hold at least one line")
        meta_pages = math.ceil(spec.kv_metadata_bytes / PAGE_SIZE)
        self.rec_base = self.meta_base + meta_pages * PAGE_SIZE
        self.per_page = PAGE_SIZE // self.stride
        self.pages_per_record = math.ceil(self.stride / PAGE_SIZE)

    def meta(self, key):
        return self.meta_base + (mix64(key) % self.meta_lines) * LINE_SIZE

    def record(self, slot):
        if self.per_page:
            page, idx = divmod(slot, self.per_page)
            return self.rec_base + page * PAGE_SIZE + idx * self.stride
        return self.rec_base + slot * self.pages_per_record * PAGE_SIZE

    def end(self, slots):
        return self.record(slots) if slots else self.rec_base


class _KeyPicker:
    """Uniform over live keys, except that with probability ``reuse`` the key
    is drawn from the last ``window`` keys touched."""

    def __init__(self, rng, live, reuse, window):
        self.rng = rng
        self.live = list(live)
        self.pos = {k: i for i, k in enumerate(self.live)}
        self.reuse = reuse
        self.recent = []
        self.window = window
        self._next = 0

    def touched(self, key):
        if self.window <= 0:
            return
        if len(self.recent) < self.window:
            self.recent.append(key)
        else:
            self.recent[self._next] = key
            self._next = (self._next + 1) % self.window

    def add(self, key):
        self.pos[key] = len(self.live)
        self.live.append(key)

    def remove(self, key):
        i = self.pos.pop(key)
        last = self.live.pop()
        if i < len(self.live):
            self.live[i] = last
            self.pos[last] = i

    def pick(self):
        rng = self.rng
        if self.recent and rng.random() < self.reuse:
            key = self.recent[rng.below(len(self.recent))]
            if key in self.pos:
                return key
        return self.live[rng.below(len(self.live))]


def gen_kv(spec: WorkloadSpec) -> RequestTrace:
    """Persistent key-value store traffic: insert, query, update, delete phases.

    Every operation touches one line of the hot metadata region, then the
    record's lines.  ``kv_prefill_keys`` records already exist on the device
    before the run; new keys append after them.
    """
    if spec.value_size not in KV_VALUE_SIZES:
        raise ValueError(f"value_size must be one of {KV_VALUE_SIZES}")
    if spec.op_count < 1:
        raise ValueError("op_count must be at least 1")
    layout = _KvLayout(spec)
    rng = Xoshiro256(spec.seed)
    prefill = spec.kv_prefill_keys
    keys = _KeyPicker(rng, range(prefill), spec.kv_reuse, spec.kv_reuse_window)
    t = _Builder()

    def record(key, write):
        addr = layout.record(key)
        for i in range(layout.lines):
            t.add(addr + i * LINE_SIZE, write=write, barrier=True)

    n = spec.op_count
    start = len(t.requests)
    for key in range(prefill, prefill + n):
        t.add(layout.meta(key), write=True, barrier=True)
        record(key, True)
        keys.add(key)
        keys.touched(key)
    t.phase("insert", start, n)

    start = len(t.requests)
    for _ in range(n):
        key = keys.pick()
        t.add(layout.meta(key), barrier=True)
        record(key, False)
        keys.touched(key)
    t.phase("query", start, n)

    start = len(t.requests)
    for _ in range(n):
        key = keys.pick()
        t.add(layout.meta(key), write=True, barrier=True)
        record(key, False)
        record(key, True)
        keys.touched(key)
    t.phase("update", start, n)

    start = len(t.requests)
    for _ in range(min(n, len(keys.live))):
        key = keys.pick()
        t.add(layout.meta(key), write=True, barrier=True)
        keys.remove(key)
    t.phase("delete", start, len(t.requests) - start)
    return t.build()


def parse_trace(text: str, base_id: int = 0) -> RequestTrace:
    t = _Builder()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise TraceParseError(lineno, f"expected 4 fields, got {len(parts)}")
        issue_s, op, addr_s, size_s = parts
        if op not in ("R", "W"):
            raise TraceParseError(lineno, f"unknown op {op!r}")
        try:
            issue = ns(float(issue_s) if "." in issue_s else int(issue_s))
        except ValueError as exc:
            raise TraceParseError(lineno, f"bad issue time {issue_s!r}: {exc}") from None
        if not addr_s.lower().startswith("0x"):
            raise TraceParseError(lineno, f"address {addr_s!r} is not 0x-hex")
        try:
            addr = int(addr_s, 16)
            size = int(size_s)
        except ValueError:
            raise TraceParseError(lineno, "malformed address or size") from None
        if size <= 0:
            raise TraceParseError(lineno, "size must be positive")
        if addr % LINE_SIZE:
            raise TraceParseError(lineno, f"address {addr:#x} is not {LINE_SIZE}-byte aligned")
        for i in range(math.ceil(size / LINE_SIZE)):
            t.add(addr + i * LINE_SIZE, write=(op == "W"), issue_time=issue)
    return t.build()


def read_trace(path) -> RequestTrace:
    with open(path) as fh:
        return parse_trace(fh.read())


def write_trace(trace: RequestTrace, path) -> None:
    with open(path, "w") as fh:
        for line in trace.lines():
            fh.write(line + "\n")


def build_trace(spec: WorkloadSpec) -> RequestTrace:
    if spec.kind is WorkloadKind.STREAM:
        return gen_stream(spec)
    if spec.kind is WorkloadKind.RANDLAT:
        return gen_randlat(spec)
    if spec.kind is WorkloadKind.KV:
        return gen_kv(spec)
    if spec.trace_path is None:
        raise ValueError("trace workload needs trace_path")
    return read_trace(spec.trace_path)
