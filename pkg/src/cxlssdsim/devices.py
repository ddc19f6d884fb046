"""Backend timing models for the five evaluated memory configurations.

Latencies are fixed per access for DRAM and PMEM.  The SSD is a FIFO
service queue of ``queue_width`` independent slots, each page read or
program occupying one slot for its full duration.
"""
from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .cache import CacheGeometry, DramCache, MshrOutcome, PolicyKind
from .engine import ns
from .errors import AddressFault
from .protocol import PAGE_SIZE, LINE_SIZE, flit_to_ssd_request
from .stats import AccessKind, Level

ZERO_LINE = bytes(LINE_SIZE)


def ddr4_closed_page_ns(tck_ns=1 / 1.2, cl=17, trcd=17, trp=17, burst=8):
    """Precharge + activate + CAS + burst for a DDR4 row miss."""
    return (trp + trcd + cl) * tck_ns + burst / 2 * tck_ns


# DDR4-2400 17-17-17: 45.8 ns, truncated to whole ns so it converts exactly
DEFAULT_DRAM_NS = int(ddr4_closed_page_ns())


class DeviceKind(str, Enum):
    DRAM = "dram"
    CXL_DRAM = "cxl-dram"
    PMEM = "pmem"
    CXL_SSD = "cxl-ssd"
    CXL_SSD_CACHED = "cxl-ssd-cached"

    @property
    def is_cxl(self):
        return self in (DeviceKind.CXL_DRAM, DeviceKind.CXL_SSD, DeviceKind.CXL_SSD_CACHED)

    @property
    def cached(self):
        return self is DeviceKind.CXL_SSD_CACHED


@dataclass(frozen=True)
class DeviceTiming:
    read_ns: float
    write_ns: float

    def __post_init__(self):
        if self.read_ns < 0 or self.write_ns < 0:
            raise ValueError("device latencies must be non-negative")

    def latency(self, kind) -> float:
        return self.read_ns if AccessKind(kind) is AccessKind.READ else self.write_ns


@dataclass(frozen=True)
class SsdConfig:
    capacity: int = 16 * 2**30
    page_size: int = PAGE_SIZE
    page_read_ns: float = 25_000
    page_program_ns: float = 300_000
    queue_width: int = 1

    def __post_init__(self):
        if self.capacity <= 0 or self.capacity % self.page_size:
            raise ValueError("SSD capacity must be a positive multiple of the page size")
        if self.page_read_ns <= 0 or self.page_program_ns <= 0:
            raise ValueError("SSD latencies must be positive")
        if self.queue_width < 1:
            raise ValueError("queue_width must be at least 1")

    @property
    def pages(self):
        return self.capacity // self.page_size


DRAM_TIMING = DeviceTiming(DEFAULT_DRAM_NS, DEFAULT_DRAM_NS)
PMEM_TIMING = DeviceTiming(150, 500)


@dataclass(frozen=True)
class Timings:
    dram: DeviceTiming = DRAM_TIMING
    pmem: DeviceTiming = PMEM_TIMING
    cxl_hop_ns: float = 25  # each of Home Agent encode and device decode
    cache_access_ns: float = 50
    ssd: SsdConfig = field(default_factory=SsdConfig)

    @property
    def cxl_total_ns(self):
        return 2 * self.cxl_hop_ns


def dram_access(kind, timing: DeviceTiming = DRAM_TIMING) -> float:
    return timing.latency(kind)


def pmem_access(kind, timing: DeviceTiming = PMEM_TIMING) -> float:
    return timing.latency(kind)


def end_to_end_latency(device, kind, cache_outcome=None, timings: Timings = Timings()) -> float:
    """Unloaded latency of one 64 B access in ns.

    ``cache_outcome`` is ``"hit"`` or ``"miss"`` (or a Hit/Miss instance) and
    only applies to the cached SSD.  A dirty eviction does not appear here:
    its program is queued after the fill.
    """
    device = DeviceKind(device)
    kind = AccessKind(kind)
    if (cache_outcome is not None) != device.cached:
        raise ValueError("cache_outcome is required for, and only for, the cached SSD")
    cxl = timings.cxl_total_ns
    if device is DeviceKind.DRAM:
        return dram_access(kind, timings.dram)
    if device is DeviceKind.PMEM:
        return pmem_access(kind, timings.pmem)
    if device is DeviceKind.CXL_DRAM:
        return cxl + dram_access(kind, timings.dram)
    ssd = timings.ssd
    if device is DeviceKind.CXL_SSD:
        return cxl + (ssd.page_read_ns if kind is AccessKind.READ else ssd.page_program_ns)
    if not isinstance(cache_outcome, str):
        cache_outcome = type(cache_outcome).__name__
    if cache_outcome.lower() == "hit":
        return cxl + timings.cache_access_ns
    return cxl + timings.cache_access_ns + ssd.page_read_ns


class SsdBackend:
    """Flash timing plus a sparse functional page store."""

    def __init__(self, config: SsdConfig = SsdConfig()):
        self.config = config
        self._read = ns(config.page_read_ns)
        self._program = ns(config.page_program_ns)
        self._slots = [0] * config.queue_width  # heap of slot free times
        self.pages: dict[int, bytes] = {}
        self.reads = 0
        self.programs = 0

    def _check(self, lba):
        if not 0 <= lba < self.config.pages:
            raise AddressFault(f"lba {lba} outside SSD of {self.config.pages} pages")

    def submit(self, now: int, kind, lba: int) -> int:
        """Queue one page op at tick ``now``; returns its completion tick."""
        self._check(lba)
        if AccessKind(kind) is AccessKind.READ:
            latency = self._read
            self.reads += 1
        else:
            latency = self._program
            self.programs += 1
        start = max(now, self._slots[0])
        done = start + latency
        heapq.heapreplace(self._slots, done)
        return done

    def ssd_page_op(self, kind, lba: int, now_ns: float = 0) -> float:
        """Delay in ns from ``now_ns`` until the op completes."""
        now = ns(now_ns)
        return (self.submit(now, kind, lba) - now) / 1000

    def read_page(self, lba: int) -> Optional[bytes]:
        return self.pages.get(lba)

    def write_page(self, lba: int, data) -> None:
        if data is None:
            self.pages.pop(lba, None)
        else:
            self.pages[lba] = bytes(data)

    def read_line(self, lba: int, offset: int) -> bytes:
        page = self.pages.get(lba)
        return ZERO_LINE if page is None else page[offset:offset + LINE_SIZE]

    def write_line(self, lba: int, offset: int, payload: bytes) -> None:
        page = bytearray(self.pages.get(lba) or PAGE_SIZE)
        page[offset:offset + LINE_SIZE] = payload
        self.pages[lba] = bytes(page)


# -- timed device models ------------------------------------------------------
#
# Each model receives requests through ``access`` with ``offset`` relative to
# its own address window and reports completion by scheduling
# ``respond(req, data, flit)`` on the engine.

class FixedLatencyDevice:
    def __init__(self, engine, stats, respond, timing: DeviceTiming):
        self.engine = engine
        self.stats = stats
        self.respond = respond
        self._lat = {AccessKind.READ: ns(timing.read_ns), AccessKind.WRITE: ns(timing.write_ns)}
        self.lines: dict[int, bytes] = {}

    def access(self, req, offset, flit=None):
        kind = AccessKind.WRITE if req.payload is not None else AccessKind.READ
        lat = self._lat[kind]
        if kind is AccessKind.WRITE:
            self.lines[offset] = req.payload
            data = None
        else:
            data = self.lines.get(offset, ZERO_LINE)
        self.stats.record_ticks(lat, LINE_SIZE, kind, Level.BACKEND)
        self.engine.at(self.engine.now + lat, self.respond, req, data, flit)

    def flush(self):
        return 0


class SsdDevice:
    """CXL-SSD without a cache: every 64 B access costs a full page op."""

    def __init__(self, engine, stats, respond, ssd: SsdBackend, base_lba: int = 0):
        self.engine = engine
        self.stats = stats
        self.respond = respond
        self.ssd = ssd
        self.base_lba = base_lba

    def access(self, req, offset, flit):
        sreq = flit_to_ssd_request(flit, self.base_lba)
        now = self.engine.now
        line_off = offset % PAGE_SIZE
        if sreq.kind is AccessKind.WRITE:
            self.ssd.write_line(sreq.lba, line_off, flit.data)
            data = None
            self.stats.ssd_programs += 1
        else:
            data = self.ssd.read_line(sreq.lba, line_off)
            self.stats.ssd_reads += 1
        done = self.ssd.submit(now, sreq.kind, sreq.lba)
        self.stats.record_ticks(done - now, PAGE_SIZE, sreq.kind, Level.BACKEND)
        self.engine.at(done, self.respond, req, data, flit)

    def flush(self):
        return 0


class CachedSsdDevice:
    """CXL-SSD behind a write-back, write-allocate DRAM page cache."""

    def __init__(self, engine, stats, respond, ssd: SsdBackend, cache: DramCache,
                 cache_access_ns: float = 50):
        self.engine = engine
        self.stats = stats
        self.respond = respond
        self.ssd = ssd
        self.cache = cache
        self.mshr = cache.mshr
        self._cache_lat = ns(cache_access_ns)
        self._pending = {}  # request id -> (req, flit, line offset)
        self._stalled = deque()

    def access(self, req, offset, flit):
        page, line_off = divmod(offset, PAGE_SIZE)
        item = (req, flit, page, line_off)
        if self._stalled:
            self._stalled.append(item)
            return
        if not self._try(item):
            self.stats.stalls += 1
            self._stalled.append(item)

    def _try(self, item) -> bool:
        req, flit, page, line_off = item
        if self.cache.probe(page):
            self.stats.hits += 1
            data = self._apply(req, page, line_off)
            self.engine.at(self.engine.now + self._cache_lat, self.respond, req, data, flit)
            return True
        outcome = self.mshr.register(page, req.id)
        if outcome is MshrOutcome.STALL:
            return False
        self.stats.misses += 1
        self._pending[req.id] = item
        if outcome is MshrOutcome.COALESCED:
            self.stats.coalesced += 1
            return True
        now = self.engine.now
        self.ssd._check(page)
        done = self.ssd.submit(now, AccessKind.READ, page)
        self.stats.ssd_reads += 1
        self.stats.record_ticks(done - now, PAGE_SIZE, AccessKind.READ, Level.BACKEND)
        self.mshr.issue(page)
        self.engine.at(done, self._fill, page)
        return True

    def _apply(self, req, page, line_off):
        if req.payload is None:
            buf = self.cache.data[page]
            return ZERO_LINE if buf is None else bytes(buf[line_off:line_off + LINE_SIZE])
        buf = self.cache.data[page]
        if buf is None:
            buf = self.cache.data[page] = bytearray(PAGE_SIZE)
        buf[line_off:line_off + LINE_SIZE] = req.payload
        self.cache.mark_dirty(page)
        return None

    def _writeback(self, page, data, now):
        # functional copy first so a later refill sees it; timing queues behind
        # whatever is already in flight
        self.ssd.write_page(page, data)
        done = self.ssd.submit(now, AccessKind.WRITE, page)
        self.stats.ssd_programs += 1
        self.stats.record_ticks(done - now, PAGE_SIZE, AccessKind.WRITE, Level.BACKEND)

    def _fill(self, page):
        now = self.engine.now
        stored = self.ssd.read_page(page)
        victim = self.cache.fill(page, None if stored is None else bytearray(stored))
        if victim is not None and victim.dirty:
            self.stats.dirty_evictions += 1
            self._writeback(victim.page, victim.data, now)
        ready = now + self._cache_lat
        for i, rid in enumerate(self.mshr.complete(page)):
            req, flit, _, line_off = self._pending.pop(rid)
            if i:
                self.cache.touch(page)
            data = self._apply(req, page, line_off)
            self.engine.at(ready, self.respond, req, data, flit)
        while self._stalled and self._try(self._stalled[0]):
            self._stalled.popleft()

    def flush(self) -> int:
        now = self.engine.now
        n = self.cache.flush_all(lambda page, data: self._writeback(page, data, now))
        self.stats.flush_writebacks += n
        return n
