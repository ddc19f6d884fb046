"""Statistics accumulation and run reports."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Optional

from .engine import TICKS_PER_NS


class Level(str, Enum):
    # CACHE is the host-facing request level (64 B granularity) even for
    # devices without a cache; BACKEND is the media behind it.
    CACHE = "cache"
    BACKEND = "backend"


class AccessKind(str, Enum):
    READ = "read"
    WRITE = "write"


def nearest_rank(sorted_values, pct):
    """Nearest-rank percentile of an already sorted sequence."""
    if not sorted_values:
        return None
    rank = max(1, math.ceil(pct / 100 * len(sorted_values)))
    return sorted_values[rank - 1]


@dataclass
class PhaseReport:
    name: str
    requests: int
    ops: Optional[int]
    duration_ns: float
    bandwidth_mb_s: Optional[float]
    qps: Optional[float]


@dataclass
class StatsReport:
    """Aggregate of one run. ``None`` marks a field that does not apply."""

    config: Optional[dict] = None
    requests: int = 0
    reads: int = 0
    writes: int = 0
    latency_min_ns: Optional[float] = None
    latency_mean_ns: Optional[float] = None
    latency_p50_ns: Optional[float] = None
    latency_p95_ns: Optional[float] = None
    latency_p99_ns: Optional[float] = None
    latency_max_ns: Optional[float] = None
    bandwidth_mb_s: Optional[float] = None
    qps: Optional[float] = None
    hit_rate: Optional[float] = None
    cache_hits: int = 0
    cache_misses: int = 0
    mshr_coalesced: int = 0
    mshr_stalls: int = 0
    ssd_page_reads: int = 0
    ssd_page_programs: int = 0
    dirty_evictions: int = 0
    flush_writebacks: int = 0
    cache_read_bytes: int = 0
    cache_write_bytes: int = 0
    backend_read_bytes: int = 0
    backend_write_bytes: int = 0
    read_amplification: Optional[float] = None
    write_amplification: Optional[float] = None
    meta_values: dict = field(default_factory=dict)
    dropped_commands: int = 0
    simulated_ns: float = 0.0
    phases: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "StatsReport":
        data = dict(data)
        data["phases"] = [PhaseReport(**p) for p in data.get("phases", [])]
        return cls(**data)


class StatsAccumulator:
    def __init__(self):
        self.reset()

    def reset(self, now: int = 0):
        self.start = now
        self.end = now
        self.samples: list[int] = []  # request latencies in ticks
        self.bytes = {(lvl, kind): 0 for lvl in Level for kind in AccessKind}
        self.counts = {(lvl, kind): 0 for lvl in Level for kind in AccessKind}
        self.backend_busy = 0
        self.hits = 0
        self.misses = 0
        self.coalesced = 0
        self.stalls = 0
        self.ssd_reads = 0
        self.ssd_programs = 0
        self.dirty_evictions = 0
        self.flush_writebacks = 0
        self.dropped = 0
        self.meta = Counter()

    def record_access(self, latency_ns, nbytes: int, kind, level) -> None:
        """Record one access; ``latency_ns`` may be given in ns (int/float)."""
        if latency_ns < 0:
            raise ValueError("negative latency")
        self.record_ticks(round(latency_ns * TICKS_PER_NS), nbytes, kind, level)

    def record_ticks(self, latency: int, nbytes: int, kind, level) -> None:
        kind = AccessKind(kind)
        level = Level(level)
        self.bytes[level, kind] += nbytes
        self.counts[level, kind] += 1
        if level is Level.CACHE:
            self.samples.append(latency)
        else:
            # backend ops are aggregated only; per-op samples would dominate memory
            self.backend_busy += latency

    def record_hit(self):
        self.hits += 1

    def record_miss(self):
        self.misses += 1

    @property
    def accesses(self):
        return self.hits + self.misses

    def summarize(self, config: Optional[dict] = None) -> StatsReport:
        rep = StatsReport(config=config)
        reads = self.counts[Level.CACHE, AccessKind.READ]
        writes = self.counts[Level.CACHE, AccessKind.WRITE]
        rep.requests = reads + writes
        rep.reads, rep.writes = reads, writes
        if self.samples:
            s = sorted(self.samples)
            rep.latency_min_ns = s[0] / TICKS_PER_NS
            rep.latency_max_ns = s[-1] / TICKS_PER_NS
            rep.latency_mean_ns = sum(s) / len(s) / TICKS_PER_NS
            rep.latency_p50_ns = nearest_rank(s, 50) / TICKS_PER_NS
            rep.latency_p95_ns = nearest_rank(s, 95) / TICKS_PER_NS
            rep.latency_p99_ns = nearest_rank(s, 99) / TICKS_PER_NS
        duration = self.end - self.start
        rep.simulated_ns = duration / TICKS_PER_NS
        rep.cache_read_bytes = self.bytes[Level.CACHE, AccessKind.READ]
        rep.cache_write_bytes = self.bytes[Level.CACHE, AccessKind.WRITE]
        rep.backend_read_bytes = self.bytes[Level.BACKEND, AccessKind.READ]
        rep.backend_write_bytes = self.bytes[Level.BACKEND, AccessKind.WRITE]
        total = rep.cache_read_bytes + rep.cache_write_bytes
        if total and duration > 0:
            # bytes / (ticks * 1e-12 s) / 1e6
            rep.bandwidth_mb_s = total * 10**6 / duration
        if self.accesses:
            rep.hit_rate = self.hits / self.accesses
        rep.cache_hits, rep.cache_misses = self.hits, self.misses
        rep.mshr_coalesced, rep.mshr_stalls = self.coalesced, self.stalls
        rep.ssd_page_reads, rep.ssd_page_programs = self.ssd_reads, self.ssd_programs
        rep.dirty_evictions, rep.flush_writebacks = self.dirty_evictions, self.flush_writebacks
        if rep.cache_read_bytes:
            rep.read_amplification = rep.backend_read_bytes / rep.cache_read_bytes
        if rep.cache_write_bytes:
            rep.write_amplification = rep.backend_write_bytes / rep.cache_write_bytes
        rep.meta_values = {k: self.meta[k] for k in sorted(self.meta)}
        rep.dropped_commands = self.dropped
        return rep
