"""Run configuration loaded from a JSON document; every key is optional.

Top-level keys (all optional)::

    device, policy, seed, output, format,
    cxl_latency_ns, dram_read_ns, dram_write_ns, pmem_read_ns, pmem_write_ns,
    cache_access_ns, cache_capacity, cache_ways, mshr_entries,
    twoq_in_fraction, lfru_aging,
    ssd_capacity, ssd_page_read_ns, ssd_page_program_ns, ssd_queue_width,
    max_outstanding, max_events, workload

``workload`` is an object with keys ``kind, footprint, op_count, value_size,
warmup, trace_path, target_device_base, kv_metadata_bytes, kv_prefill_keys,
kv_reuse, kv_reuse_window``.  Unknown keys are rejected.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from typing import Optional

from .cache import CacheGeometry, PolicyKind
from .devices import DEFAULT_DRAM_NS, DeviceKind, DeviceTiming, SsdConfig, Timings
from .engine import DEFAULT_MAX_EVENTS, ns
from .errors import ConfigError
from .system import SystemConfig
from .workloads import KV_VALUE_SIZES, GiB, MiB, WorkloadKind, WorkloadSpec

FORMATS = ("json", "csv")


@dataclass(frozen=True)
class RunConfig:
    device: DeviceKind = DeviceKind.CXL_SSD_CACHED
    policy: Optional[PolicyKind] = PolicyKind.LRU
    seed: int = 42
    output: Optional[str] = None
    format: str = "json"
    cxl_latency_ns: float = 25
    dram_read_ns: float = DEFAULT_DRAM_NS
    dram_write_ns: float = DEFAULT_DRAM_NS
    pmem_read_ns: float = 150
    pmem_write_ns: float = 500
    cache_access_ns: float = 50
    cache_capacity: int = 16 * MiB
    cache_ways: int = 8
    mshr_entries: int = 32
    twoq_in_fraction: float = 0.25
    lfru_aging: int = 1024
    ssd_capacity: int = 16 * GiB
    ssd_page_read_ns: float = 25_000
    ssd_page_program_ns: float = 300_000
    ssd_queue_width: int = 1
    max_outstanding: int = 16
    max_events: int = DEFAULT_MAX_EVENTS
    workload: WorkloadSpec = field(default_factory=WorkloadSpec)

    def system_config(self) -> SystemConfig:
        timings = Timings(
            dram=DeviceTiming(self.dram_read_ns, self.dram_write_ns),
            pmem=DeviceTiming(self.pmem_read_ns, self.pmem_write_ns),
            cxl_hop_ns=self.cxl_latency_ns,
            cache_access_ns=self.cache_access_ns,
            ssd=SsdConfig(self.ssd_capacity, 4096, self.ssd_page_read_ns,
                          self.ssd_page_program_ns, self.ssd_queue_width),
        )
        return SystemConfig(
            device=self.device, policy=self.policy, timings=timings,
            cache=CacheGeometry(self.cache_capacity, 4096, self.cache_ways),
            mshr_entries=self.mshr_entries, twoq_in_fraction=self.twoq_in_fraction,
            lfru_aging=self.lfru_aging, max_outstanding=self.max_outstanding,
            window_base=self.workload.target_device_base, max_events=self.max_events,
        )

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "workload":
                value = {k: getattr(value, k) for k in _WORKLOAD_KEYS}
                value["kind"] = value["kind"].value
            elif f.name in ("device", "policy") and value is not None:
                value = value.value
            out[f.name] = value
        return out

    def with_overrides(self, **kw) -> "RunConfig":
        """Apply flag-style overrides and revalidate."""
        doc = self.to_dict()
        workload = doc.pop("workload")
        for key, value in kw.items():
            if value is None:
                continue
            if key in _WORKLOAD_KEYS:
                workload[key] = value
            else:
                doc[key] = value
        if kw.get("device") is not None and kw.get("policy") is None:
            # switching device drops a policy the new device cannot take
            if DeviceKind(_enum(DeviceKind, "device", kw["device"])).cached:
                doc["policy"] = doc["policy"] or PolicyKind.LRU.value
            else:
                doc["policy"] = None
        doc["workload"] = workload
        return config_from_dict(doc)


_TOP_KEYS = {f.name for f in fields(RunConfig)}
_WORKLOAD_KEYS = ("kind", "footprint", "op_count", "value_size", "warmup", "trace_path",
                  "target_device_base", "kv_metadata_bytes", "kv_prefill_keys", "kv_reuse",
                  "kv_reuse_window")

_POSITIVE_INT = ("cache_capacity", "cache_ways", "mshr_entries", "ssd_capacity",
                 "ssd_queue_width", "max_outstanding", "max_events")
_POSITIVE_NS = ("cxl_latency_ns", "dram_read_ns", "dram_write_ns", "pmem_read_ns",
                "pmem_write_ns", "cache_access_ns", "ssd_page_read_ns", "ssd_page_program_ns")


def _int(key, value, minimum=1):
    if isinstance(value, bool):
        raise ConfigError(key, "expected an integer")
    if isinstance(value, str):
        try:
            value = int(value.strip(), 0)
        except ValueError:
            raise ConfigError(key, f"expected an integer, got {value!r}") from None
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if not isinstance(value, int):
        raise ConfigError(key, f"expected an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(key, f"out of range: {value} < {minimum}")
    return value


def _number(key, value):
    if isinstance(value, bool):
        raise ConfigError(key, "expected a number")
    if isinstance(value, str):
        try:
            value = float(value)
        except ValueError:
            raise ConfigError(key, f"expected a number, got {value!r}") from None
    if not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    return value


def _latency(key, value):
    value = _number(key, value)
    if value <= 0:
        raise ConfigError(key, f"out of range: {value} must be positive")
    try:
        ns(value)
    except ValueError as exc:
        raise ConfigError(key, str(exc)) from None
    return value


def _enum(cls, key, value):
    try:
        return cls(value)
    except ValueError:
        choices = ", ".join(m.value for m in cls)
        raise ConfigError(key, f"{value!r} is not one of {choices}") from None


def _workload(doc, seed) -> WorkloadSpec:
    if not isinstance(doc, dict):
        raise ConfigError("workload", "expected an object")
    unknown = set(doc) - set(_WORKLOAD_KEYS)
    if unknown:
        raise ConfigError(f"workload.{sorted(unknown)[0]}", "unknown key")
    kw = {"seed": seed}
    if "kind" in doc:
        kw["kind"] = _enum(WorkloadKind, "workload.kind", doc["kind"])
    for key in ("footprint", "op_count", "kv_metadata_bytes", "kv_reuse_window"):
        if doc.get(key) is not None:
            kw[key] = _int(f"workload.{key}", doc[key], 0 if key == "kv_reuse_window" else 1)
    if doc.get("kv_prefill_keys") is not None:
        kw["kv_prefill_keys"] = _int("workload.kv_prefill_keys", doc["kv_prefill_keys"], 0)
    if doc.get("target_device_base") is not None:
        kw["target_device_base"] = _int("workload.target_device_base", doc["target_device_base"], 0)
    if doc.get("value_size") is not None:
        vs = _int("workload.value_size", doc["value_size"])
        if vs not in KV_VALUE_SIZES:
            raise ConfigError("workload.value_size", f"must be one of {KV_VALUE_SIZES}")
        kw["value_size"] = vs
    if doc.get("kv_reuse") is not None:
        reuse = _number("workload.kv_reuse", doc["kv_reuse"])
        if not 0 <= reuse <= 1:
            raise ConfigError("workload.kv_reuse", "out of range: must be within [0, 1]")
        kw["kv_reuse"] = reuse
    if "warmup" in doc:
        if not isinstance(doc["warmup"], bool):
            raise ConfigError("workload.warmup", "expected true or false")
        kw["warmup"] = doc["warmup"]
    if doc.get("trace_path") is not None:
        if not isinstance(doc["trace_path"], str):
            raise ConfigError("workload.trace_path", "expected a string")
        kw["trace_path"] = doc["trace_path"]
    spec = WorkloadSpec(**kw)
    if spec.kind is WorkloadKind.TRACE and spec.trace_path is None:
        raise ConfigError("workload.trace_path", "required for trace workloads")
    return spec


def config_from_dict(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("<document>", "expected a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown key")
    kw = {}
    if "device" in doc:
        kw["device"] = _enum(DeviceKind, "device", doc["device"])
    device = kw.get("device", RunConfig.device)
    policy = doc.get("policy")
    if policy is not None:
        if not device.cached:
            raise ConfigError("policy", f"only applies to {DeviceKind.CXL_SSD_CACHED.value}, "
                                        f"not {device.value}")
        kw["policy"] = _enum(PolicyKind, "policy", policy)
    else:
        kw["policy"] = PolicyKind.LRU if device.cached else None
    seed = _int("seed", doc["seed"], 0) if doc.get("seed") is not None else RunConfig.seed
    kw["seed"] = seed
    if doc.get("output") is not None:
        if not isinstance(doc["output"], str):
            raise ConfigError("output", "expected a path string")
        kw["output"] = doc["output"]
    if doc.get("format") is not None:
        if doc["format"] not in FORMATS:
            raise ConfigError("format", f"{doc['format']!r} is not one of {', '.join(FORMATS)}")
        kw["format"] = doc["format"]
    for key in _POSITIVE_INT:
        if doc.get(key) is not None:
            kw[key] = _int(key, doc[key])
    for key in _POSITIVE_NS:
        if doc.get(key) is not None:
            kw[key] = _latency(key, doc[key])
    if doc.get("twoq_in_fraction") is not None:
        frac = _number("twoq_in_fraction", doc["twoq_in_fraction"])
        if not 0 < frac <= 1:
            raise ConfigError("twoq_in_fraction", "out of range: must be within (0, 1]")
        kw["twoq_in_fraction"] = frac
    if doc.get("lfru_aging") is not None:
        kw["lfru_aging"] = _int("lfru_aging", doc["lfru_aging"], 0)
    kw["workload"] = _workload(doc.get("workload") or {}, seed)
    cfg = RunConfig(**kw)
    _check_derived(cfg)
    return cfg


def _check_derived(cfg: RunConfig):
    try:
        CacheGeometry(cfg.cache_capacity, 4096, cfg.cache_ways).for_policy(cfg.policy or "lru")
    except ValueError as exc:
        raise ConfigError("cache_capacity", str(exc)) from None
    if cfg.ssd_capacity % 4096:
        raise ConfigError("ssd_capacity", "must be a multiple of the 4096 B page")
    fp = cfg.workload.effective_footprint
    if fp is not None and fp > cfg.ssd_capacity:
        raise ConfigError("workload.footprint", "exceeds device capacity")
    if cfg.workload.target_device_base < 512 * MiB:
        raise ConfigError("workload.target_device_base", "overlaps local memory")


def parse_config(text: str) -> RunConfig:
    text = text.strip()
    if not text:
        return config_from_dict({})
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<document>", f"invalid JSON: {exc}") from None
    return config_from_dict(doc)


def dump_config(cfg: RunConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True)


def sweep_variant(cfg: RunConfig, axis: str, value) -> RunConfig:
    if axis == "device":
        device = _enum(DeviceKind, "device", value)
        policy = (cfg.policy or PolicyKind.LRU) if device.cached else None
        return replace(cfg, device=device, policy=policy)
    if axis == "policy":
        if not cfg.device.cached:
            raise ConfigError("policy", f"a policy sweep needs device {DeviceKind.CXL_SSD_CACHED.value}")
        return replace(cfg, policy=_enum(PolicyKind, "policy", value))
    raise ConfigError("sweep", f"unknown axis {axis!r}; use device or policy")
