"""Small trace builders shared by the system-level tests."""
from cxlssdsim.protocol import MemRequest, RequestKind
from cxlssdsim.workloads import DEFAULT_CXL_BASE, RequestTrace, payload_for

BASE = DEFAULT_CXL_BASE


def make_trace(ops, barrier=False, warmup=0):
    """``ops`` is a list of ``(offset, write)`` pairs relative to the CXL window."""
    reqs = []
    for i, (off, write) in enumerate(ops):
        if write:
            reqs.append(MemRequest(i, BASE + off, RequestKind.WRITE, payload=payload_for(i)))
        else:
            reqs.append(MemRequest(i, BASE + off, RequestKind.READ))
    bars = barrier if isinstance(barrier, list) else [barrier] * len(reqs)
    return RequestTrace(reqs, bars, warmup)


def reads(offsets, **kw):
    return make_trace([(o, False) for o in offsets], **kw)
