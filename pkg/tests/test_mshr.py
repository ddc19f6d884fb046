import pytest

from cxlssdsim.cache import Mshr, MshrOutcome
from cxlssdsim.errors import MshrError


def test_coalesce_on_same_page():
    m = Mshr(4)
    assert m.register(10, 1) is MshrOutcome.NEW_MISS
    assert m.register(10, 2) is MshrOutcome.COALESCED
    assert len(m) == 1
    m.issue(10)
    assert m.complete(10) == [1, 2]
    assert 10 not in m


def test_stall_when_full():
    m = Mshr(2)
    m.register(1, 1)
    m.register(2, 2)
    assert m.full
    assert m.register(3, 3) is MshrOutcome.STALL
    # a full table still merges into existing entries
    assert m.register(2, 4) is MshrOutcome.COALESCED


def test_duplicate_request_id_is_an_error():
    m = Mshr()
    m.register(5, 1)
    with pytest.raises(MshrError):
        m.register(5, 1)


def test_complete_requires_issue():
    m = Mshr()
    with pytest.raises(MshrError):
        m.complete(9)
    m.register(9, 1)
    with pytest.raises(MshrError):
        m.complete(9)
    with pytest.raises(MshrError):
        m.issue(8)


def test_capacity_must_be_positive():
    with pytest.raises(ValueError):
        Mshr(0)
