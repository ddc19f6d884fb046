"""Host side of a run: trace replay through the Home Agent to one device.

Memory map: local DRAM at ``[0, local_memory)`` and the evaluated device's
window at ``[window_base, window_base + window_size)``.  DRAM and PMEM
configurations map the window as local memory; the three CXL configurations
map it to CXL device 0.

CXL requests pay one protocol hop at the Home Agent and one at the device
decoder before the device sees them.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

from .cache import CacheGeometry, DramCache, PolicyKind
from .devices import (CachedSsdDevice, DeviceKind, FixedLatencyDevice, SsdBackend, SsdDevice,
                      Timings)
from .engine import DEFAULT_MAX_EVENTS, Engine, ns
from .protocol import (MAINTENANCE_KINDS, PAGE_SIZE, AddressMap, AddressRange, CxlDevice,
                       HomeAgent, LocalMemory, RequestKind, to_response)
from .stats import AccessKind, Level, PhaseReport, StatsAccumulator, StatsReport
from .workloads import DEFAULT_CXL_BASE, MiB, RequestTrace

log = logging.getLogger(__name__)

LOCAL_MEMORY = 512 * MiB


@dataclass(frozen=True)
class SystemConfig:
    device: DeviceKind = DeviceKind.CXL_SSD_CACHED
    policy: Optional[PolicyKind] = PolicyKind.LRU
    timings: Timings = field(default_factory=Timings)
    cache: CacheGeometry = field(default_factory=CacheGeometry)
    mshr_entries: int = 32
    twoq_in_fraction: float = 0.25
    lfru_aging: int = 1024
    max_outstanding: int = 16
    local_memory: int = LOCAL_MEMORY
    window_base: int = DEFAULT_CXL_BASE
    max_events: int = DEFAULT_MAX_EVENTS


class Simulator:
    """One engine, one device, one trace. Not reusable across traces."""

    def __init__(self, config: SystemConfig = SystemConfig(), *, capture_reads=False,
                 on_complete: Optional[Callable] = None):
        self.config = config
        self.engine = Engine(config.max_events)
        self.stats = StatsAccumulator()
        device = DeviceKind(config.device)
        timings = config.timings
        window = timings.ssd.capacity
        if config.window_base < config.local_memory:
            raise ValueError("device window overlaps local memory")
        if device is DeviceKind.PMEM:
            window_target = LocalMemory("pmem")
        elif device is DeviceKind.DRAM:
            window_target = LocalMemory("window")
        else:
            window_target = CxlDevice(0)
        self.amap = AddressMap([
            AddressRange(0, config.local_memory, LocalMemory("dram")),
            AddressRange(config.window_base, window, window_target),
        ])
        self.home_agent = HomeAgent(self.amap)
        respond = self._respond
        e, s = self.engine, self.stats
        self.local = {
            "dram": FixedLatencyDevice(e, s, respond, timings.dram),
            "window": FixedLatencyDevice(e, s, respond, timings.dram),
            "pmem": FixedLatencyDevice(e, s, respond, timings.pmem),
        }
        self.ssd = None
        self.cache = None
        base_lba = config.window_base // PAGE_SIZE
        if device is DeviceKind.CXL_DRAM:
            self.cxl = FixedLatencyDevice(e, s, respond, timings.dram)
        elif device is DeviceKind.CXL_SSD:
            self.ssd = SsdBackend(timings.ssd)
            self.cxl = SsdDevice(e, s, respond, self.ssd, base_lba)
        elif device is DeviceKind.CXL_SSD_CACHED:
            self.ssd = SsdBackend(timings.ssd)
            self.cache = DramCache(config.cache, config.policy or PolicyKind.LRU,
                                   config.mshr_entries, twoq_in_fraction=config.twoq_in_fraction,
                                   lfru_aging=config.lfru_aging)
            self.cxl = CachedSsdDevice(e, s, respond, self.ssd, self.cache,
                                       timings.cache_access_ns)
        else:
            self.cxl = None
        self._hop = ns(timings.cxl_hop_ns)
        self.capture_reads = capture_reads
        self.read_data: dict[int, bytes] = {}
        self.on_complete = on_complete
        self._issue_at: dict[int, int] = {}
        self._done_at: dict[int, int] = {}
        self.max_outstanding = config.max_outstanding
        if self.max_outstanding < 1:
            raise ValueError("max_outstanding must be at least 1")
        self.max_seen_outstanding = 0

    # -- request path ---------------------------------------------------

    def issue(self, req) -> None:
        now = self.engine.now
        self._issue_at[req.id] = now
        rng = self.amap.range_of(req.addr)
        offset = req.addr - rng.base
        if isinstance(rng.target, LocalMemory):
            if req.kind in (RequestKind.READ, RequestKind.WRITE):
                self.local[rng.target.name].access(req, offset)
            elif req.kind in MAINTENANCE_KINDS:
                self.engine.at(now, self._respond, req, None, None)
            else:
                log.warning("dropping request %d: %s not supported", req.id, req.kind.name)
                self.stats.dropped += 1
                self.engine.at(now, self._retire, req)
            return
        _, flit = self.home_agent.forward(req)
        if flit is None:
            self.stats.dropped += 1
            self.engine.at(now, self._retire, req)
            return
        self.stats.meta[flit.meta.name] += 1
        self.engine.at(now + 2 * self._hop, self._device_arrival, req, offset, flit)

    def _device_arrival(self, req, offset, flit):
        if flit.is_maintenance:
            # coherence hint recorded only; no directory action
            self._respond(req, None, flit)
        else:
            self.cxl.access(req, offset, flit)

    def _respond(self, req, data, flit):
        if flit is not None:
            data = to_response(flit, data).data
        if req.kind is RequestKind.READ or req.kind is RequestKind.WRITE:
            kind = AccessKind.READ if req.kind is RequestKind.READ else AccessKind.WRITE
            now = self.engine.now
            if self._measuring:
                self.stats.record_ticks(now - self._issue_at[req.id], 64, kind, Level.CACHE)
                self.stats.end = now
            if self.capture_reads and kind is AccessKind.READ:
                self.read_data[req.id] = data
        if self.on_complete is not None:
            self.on_complete(req, data)
        self._retire(req)

    def _retire(self, req):
        self._done_at[req.id] = self.engine.now
        self._outstanding -= 1
        self._pump()

    # -- replay -----------------------------------------------------------

    def _pump(self):
        trace = self._trace
        reqs, barrier = trace.requests, trace.barrier
        n = len(reqs)
        while self._next < n:
            i = self._next
            if i == trace.warmup and not self._measuring:
                if self._outstanding:
                    return
                self._start_measuring()
            if self._outstanding >= self.max_outstanding:
                return
            if barrier[i] and self._outstanding:
                return
            req = reqs[i]
            now = self.engine.now
            if req.issue_time > now:
                if not self._wakeup_pending:
                    self._wakeup_pending = True
                    self.engine.at(req.issue_time, self._wakeup)
                return
            self._next += 1
            self._outstanding += 1
            self.max_seen_outstanding = max(self.max_seen_outstanding, self._outstanding)
            self.issue(req)
        if self._next >= n and not self._measuring and not self._outstanding:
            self._start_measuring()

    def _wakeup(self):
        self._wakeup_pending = False
        self._pump()

    def _start_measuring(self):
        self.stats.reset(self.engine.now)
        self._measuring = True

    def replay(self, trace: RequestTrace, flush=True) -> StatsReport:
        self._trace = trace
        self._next = 0
        self._outstanding = 0
        self._wakeup_pending = False
        self._measuring = trace.warmup == 0
        if self._measuring:
            self.stats.reset(0)
        self.engine.at(0, self._pump)
        self.engine.run_until_idle()
        if flush:
            self.flush()
        report = self.stats.summarize()
        report.phases = self._phase_reports(trace)
        ops = [p.ops for p in trace.phases if p.ops is not None]
        if ops and report.simulated_ns > 0:
            report.qps = sum(ops) / (report.simulated_ns * 1e-9)
        return report

    def flush(self) -> int:
        return self.cxl.flush() if self.cxl is not None else 0

    def _phase_reports(self, trace):
        out = []
        for p in trace.phases:
            if p.end <= p.start:
                continue
            t0 = self._issue_at[trace.requests[p.start].id]
            t1 = max(self._done_at[trace.requests[i].id] for i in range(p.start, p.end))
            dur = t1 - t0
            nbytes = 64 * (p.end - p.start)
            bw = nbytes * 10**6 / dur if dur > 0 else None
            qps = p.ops / (dur * 1e-12) if p.ops is not None and dur > 0 else None
            out.append(PhaseReport(p.name, p.end - p.start, p.ops, dur / 1000, bw, qps))
        return out


def simulate(trace: RequestTrace, config: SystemConfig = SystemConfig(), **kw) -> StatsReport:
    return Simulator(config, **kw).replay(trace)
