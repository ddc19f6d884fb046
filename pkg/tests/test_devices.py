import pytest

from cxlssdsim.cache import Hit, Miss
from cxlssdsim.devices import (DEFAULT_DRAM_NS, DeviceKind, DeviceTiming, SsdBackend, SsdConfig,
                               Timings, ddr4_closed_page_ns, dram_access, end_to_end_latency,
                               pmem_access)
from cxlssdsim.errors import AddressFault


def test_dram_default_from_ddr4_timing():
    # 51 cycles of 0.8333 ns plus a 4-cycle burst
    assert ddr4_closed_page_ns() == pytest.approx(55 / 1.2)
    assert DEFAULT_DRAM_NS == 45


def test_pmem_asymmetry():
    assert pmem_access("read") == 150
    assert pmem_access("write") == 500
    assert dram_access("read") == dram_access("write") == 45


@pytest.mark.parametrize("device,kind,outcome,expected", [
    ("dram", "read", None, 45),
    ("cxl-dram", "read", None, 95),
    ("cxl-dram", "write", None, 95),
    ("pmem", "read", None, 150),
    ("pmem", "write", None, 500),
    ("cxl-ssd", "read", None, 25_050),
    ("cxl-ssd", "write", None, 300_050),
    ("cxl-ssd-cached", "read", "hit", 100),
    ("cxl-ssd-cached", "write", Hit(), 100),
    ("cxl-ssd-cached", "read", "miss", 25_100),
    ("cxl-ssd-cached", "write", Miss(), 25_100),
])
def test_end_to_end_latency(device, kind, outcome, expected):
    assert end_to_end_latency(device, kind, outcome) == expected


def test_cache_outcome_only_for_cached():
    with pytest.raises(ValueError):
        end_to_end_latency("cxl-ssd-cached", "read")
    with pytest.raises(ValueError):
        end_to_end_latency("dram", "read", "hit")


def test_cxl_surcharge_scales_with_hop():
    t = Timings(cxl_hop_ns=40)
    assert end_to_end_latency("cxl-dram", "read", timings=t) - end_to_end_latency("dram", "read", timings=t) == 80


def test_device_kind_flags():
    assert DeviceKind.CXL_DRAM.is_cxl and not DeviceKind.PMEM.is_cxl
    assert DeviceKind("cxl-ssd-cached").cached


def test_ssd_queue_serializes_with_one_slot():
    ssd = SsdBackend()
    assert ssd.ssd_page_op("read", 0) == 25_000
    # second op waits behind the first
    assert ssd.ssd_page_op("write", 1) == 325_000
    assert (ssd.reads, ssd.programs) == (1, 1)


def test_ssd_queue_width_overlaps():
    ssd = SsdBackend(SsdConfig(queue_width=2))
    assert ssd.submit(0, "read", 0) == 25_000_000
    assert ssd.submit(0, "read", 1) == 25_000_000
    assert ssd.submit(0, "read", 2) == 50_000_000


def test_ssd_bounds():
    ssd = SsdBackend(SsdConfig(capacity=8192))
    with pytest.raises(AddressFault):
        ssd.submit(0, "read", 2)
    with pytest.raises(AddressFault):
        ssd.ssd_page_op("read", -1)


def test_ssd_functional_store():
    ssd = SsdBackend()
    assert ssd.read_line(5, 64) == bytes(64)
    ssd.write_line(5, 64, b"\x07" * 64)
    assert ssd.read_line(5, 64) == b"\x07" * 64
    assert ssd.read_line(5, 0) == bytes(64)
    ssd.write_page(5, None)
    assert ssd.read_page(5) is None


@pytest.mark.parametrize("kw", [dict(capacity=1000), dict(page_read_ns=0), dict(queue_width=0)])
def test_bad_ssd_config(kw):
    with pytest.raises(ValueError):
        SsdConfig(**kw)


def test_negative_timing_rejected():
    with pytest.raises(ValueError):
        DeviceTiming(-1, 5)
