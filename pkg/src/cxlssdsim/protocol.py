"""Home Agent side of CXL.mem: routing, flit conversion and the flit codec.

Wire layout of a flit header (64 bytes, little endian)::

    0      txn        (CxlTxn)
    1      meta       (MetaValue, 0xFF on S2M flits)
    2..9   addr       u64
    10..17 lba        u64
    18..19 nlb        u16
    20..23 req_id     u32
    24..63 reserved, zero

Payload-bearing flits (M2SRwD, S2MDRS) are followed by a second 64-byte
slot holding the cache line.
"""
from __future__ import annotations

import bisect
import logging
import struct
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Optional, Union

from .errors import AddressFault, ProtocolError, UnsupportedCommand
from .stats import AccessKind

log = logging.getLogger(__name__)

LINE_SIZE = 64
PAGE_SIZE = 4096
FLIT_SIZE = 64

_HEADER = struct.Struct("<BBQQHI")
_NO_META = 0xFF


class RequestKind(Enum):
    READ = "R"
    WRITE = "W"
    INVALIDATE_LINE = "INV"
    FLUSH_LINE = "FLUSH"
    FLUSH_INVALIDATE_LINE = "FLUSHINV"
    # not converted by the Home Agent; exists so the warning path is reachable
    ATOMIC = "ATOMIC"


MAINTENANCE_KINDS = frozenset(
    {RequestKind.INVALIDATE_LINE, RequestKind.FLUSH_LINE, RequestKind.FLUSH_INVALIDATE_LINE})


@dataclass(slots=True)
class MemRequest:
    id: int
    addr: int
    kind: RequestKind
    issue_time: int = 0  # ticks
    payload: Optional[bytes] = None
    size: int = LINE_SIZE

    def __post_init__(self):
        if self.size != LINE_SIZE:
            raise ValueError(f"request size must be {LINE_SIZE}, got {self.size}")
        if self.addr % LINE_SIZE:
            raise ValueError(f"address {self.addr:#x} is not {LINE_SIZE}-byte aligned")
        if (self.payload is not None) != (self.kind is RequestKind.WRITE):
            raise ValueError("payload must be present exactly for writes")
        if self.payload is not None and len(self.payload) != LINE_SIZE:
            raise ValueError("write payload must be one 64-byte line")


class CxlTxn(IntEnum):
    M2S_REQ = 0
    M2S_RWD = 1
    S2M_DRS = 2
    S2M_NDR = 3

    @property
    def host_to_device(self):
        return self in (CxlTxn.M2S_REQ, CxlTxn.M2S_RWD)

    @property
    def carries_data(self):
        return self in (CxlTxn.M2S_RWD, CxlTxn.S2M_DRS)


class MetaValue(IntEnum):
    INVALID = 0
    ANY = 1
    SHARED = 2


@dataclass(frozen=True, slots=True)
class CxlFlit:
    txn: CxlTxn
    addr: int
    meta: Optional[MetaValue]
    lba: int
    nlb: int = 1
    req_id: int = 0
    data: Optional[bytes] = None

    def __post_init__(self):
        if self.txn.host_to_device != (self.meta is not None):
            raise ProtocolError(f"{self.txn.name}: MetaValue must be set exactly on M2S flits")
        if self.txn.carries_data != (self.data is not None):
            raise ProtocolError(f"{self.txn.name}: data presence mismatch")
        if self.data is not None and len(self.data) != LINE_SIZE:
            raise ProtocolError("flit data must be 64 bytes")
        if self.nlb < 1:
            raise ProtocolError("nlb must be at least 1")
        if not self.lba * PAGE_SIZE <= self.addr < (self.lba + self.nlb) * PAGE_SIZE:
            raise ProtocolError(f"addr {self.addr:#x} outside lba {self.lba} + {self.nlb}")

    @property
    def is_maintenance(self):
        # reads always carry Any; an M2SReq with another hint is a data-less
        # invalidate/flush that completes with S2MNDR
        return self.txn is CxlTxn.M2S_REQ and self.meta is not MetaValue.ANY


def encode_header(flit: CxlFlit) -> bytes:
    meta = _NO_META if flit.meta is None else int(flit.meta)
    try:
        head = _HEADER.pack(int(flit.txn), meta, flit.addr, flit.lba, flit.nlb, flit.req_id)
    except struct.error as exc:
        raise ProtocolError(f"flit field out of range: {exc}") from None
    return head.ljust(FLIT_SIZE, b"\0")


def encode_flit(flit: CxlFlit) -> bytes:
    head = encode_header(flit)
    return head + flit.data if flit.data is not None else head


def decode_flit(raw: bytes) -> CxlFlit:
    if len(raw) not in (FLIT_SIZE, 2 * FLIT_SIZE):
        raise ProtocolError(f"flit image must be 64 or 128 bytes, got {len(raw)}")
    txn, meta, addr, lba, nlb, req_id = _HEADER.unpack_from(raw)
    try:
        txn = CxlTxn(txn)
        meta = None if meta == _NO_META else MetaValue(meta)
    except ValueError as exc:
        raise ProtocolError(str(exc)) from None
    if any(raw[_HEADER.size:FLIT_SIZE]):
        raise ProtocolError("reserved header bytes are not zero")
    data = bytes(raw[FLIT_SIZE:]) if len(raw) > FLIT_SIZE else None
    return CxlFlit(txn, addr, meta, lba, nlb, req_id, data)


# -- routing -----------------------------------------------------------------

@dataclass(frozen=True)
class LocalMemory:
    name: str = "dram"


@dataclass(frozen=True)
class CxlDevice:
    device_id: int = 0


Target = Union[LocalMemory, CxlDevice]


@dataclass(frozen=True)
class AddressRange:
    base: int
    size: int
    target: Target

    @property
    def end(self):
        return self.base + self.size


class AddressMap:
    """Disjoint address ranges; immutable after construction."""

    def __init__(self, ranges):
        ranges = sorted(ranges, key=lambda r: r.base)
        if not ranges:
            raise ValueError("address map needs at least one range")
        for r in ranges:
            if r.size <= 0:
                raise ValueError(f"empty range at {r.base:#x}")
        for a, b in zip(ranges, ranges[1:]):
            if a.end > b.base:
                raise ValueError(f"ranges overlap at {b.base:#x}")
        self.ranges = tuple(ranges)
        self._bases = [r.base for r in ranges]

    def range_of(self, addr: int) -> AddressRange:
        i = bisect.bisect_right(self._bases, addr) - 1
        if i >= 0 and addr < self.ranges[i].end:
            return self.ranges[i]
        raise AddressFault(f"address {addr:#x} is not mapped")

    def route(self, addr: int) -> Target:
        return self.range_of(addr).target


def route(addr: int, amap: AddressMap) -> Target:
    return amap.route(addr)


# -- conversion --------------------------------------------------------------

_META = {
    RequestKind.READ: MetaValue.ANY,
    RequestKind.WRITE: MetaValue.ANY,
    RequestKind.INVALIDATE_LINE: MetaValue.INVALID,
    RequestKind.FLUSH_INVALIDATE_LINE: MetaValue.INVALID,
    RequestKind.FLUSH_LINE: MetaValue.SHARED,
}


def meta_value_for(kind: RequestKind) -> MetaValue:
    try:
        return _META[kind]
    except KeyError:
        raise UnsupportedCommand(f"no CXL.mem conversion for {kind.name}") from None


def to_flit(req: MemRequest) -> CxlFlit:
    meta = meta_value_for(req.kind)
    lba = req.addr // PAGE_SIZE
    if req.kind is RequestKind.WRITE:
        return CxlFlit(CxlTxn.M2S_RWD, req.addr, meta, lba, 1, req.id, req.payload)
    return CxlFlit(CxlTxn.M2S_REQ, req.addr, meta, lba, 1, req.id)


def to_response(flit: CxlFlit, data: Optional[bytes] = None) -> CxlFlit:
    if not flit.txn.host_to_device:
        raise ProtocolError(f"cannot respond to a {flit.txn.name} flit")
    if flit.txn is CxlTxn.M2S_RWD or flit.is_maintenance:
        return CxlFlit(CxlTxn.S2M_NDR, flit.addr, None, flit.lba, flit.nlb, flit.req_id)
    if data is None:
        raise ProtocolError(f"read response for request {flit.req_id} has no data")
    return CxlFlit(CxlTxn.S2M_DRS, flit.addr, None, flit.lba, flit.nlb, flit.req_id, data)


@dataclass(frozen=True, slots=True)
class SsdRequest:
    kind: AccessKind
    lba: int
    nlb: int = 1


def flit_to_ssd_request(flit: CxlFlit, base_lba: int = 0) -> SsdRequest:
    """Translate an M2S data flit into a block request; ``base_lba`` is the
    device window's first block, making the result device-relative."""
    if not flit.txn.host_to_device or flit.is_maintenance:
        raise ProtocolError(f"{flit.txn.name} flit does not map to an SSD request")
    kind = AccessKind.WRITE if flit.txn is CxlTxn.M2S_RWD else AccessKind.READ
    return SsdRequest(kind, flit.lba - base_lba, flit.nlb)


class HomeAgent:
    """Routes requests and converts the ones bound for CXL devices.

    Unsupported commands are logged and dropped, never raised to the caller.
    """

    def __init__(self, amap: AddressMap):
        self.amap = amap
        self.dropped = 0

    def forward(self, req: MemRequest):
        """Return ``(target, flit)``; ``flit`` is None for local memory and
        ``(target, None)`` with ``dropped`` bumped for unsupported kinds."""
        target = self.amap.route(req.addr)
        if isinstance(target, LocalMemory):
            return target, None
        try:
            return target, to_flit(req)
        except UnsupportedCommand as exc:
            log.warning("dropping request %d: %s", req.id, exc)
            self.dropped += 1
            return target, None
