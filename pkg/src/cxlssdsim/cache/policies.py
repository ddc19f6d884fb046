"""Per-set replacement state for the five supported policies.

Every set tracks which page sits in each way plus the policy's ordering
metadata.  Invalid ways are always filled before a victim is chosen, so
``victim()`` is only consulted on a full set.
"""
from __future__ import annotations

from collections import OrderedDict
from enum import Enum


class PolicyKind(str, Enum):
    DIRECT = "direct"
    LRU = "lru"
    FIFO = "fifo"
    TWOQ = "2q"
    LFRU = "lfru"


class CacheSet:
    __slots__ = ("ways", "tags", "dirty", "where")

    def __init__(self, ways: int):
        self.ways = ways
        self.tags = [None] * ways
        self.dirty = [False] * ways
        self.where = {}

    def find(self, tag):
        return self.where.get(tag)

    def free_way(self):
        if len(self.where) == self.ways:
            return None
        return self.tags.index(None)

    def place(self, way, tag):
        self.tags[way] = tag
        self.dirty[way] = False
        self.where[tag] = way
        self.inserted(way)

    def remove(self, way):
        tag = self.tags[way]
        del self.where[tag]
        self.tags[way] = None
        self.dirty[way] = False
        self.removed(way)
        return tag

    # policy hooks
    def on_access(self):
        pass

    def touch(self, way):
        pass

    def inserted(self, way):
        pass

    def removed(self, way):
        pass

    def victim(self) -> int:
        raise NotImplementedError


class DirectSet(CacheSet):
    __slots__ = ()

    def __init__(self, ways=1):
        if ways != 1:
            raise ValueError("direct-mapped sets have exactly one way")
        super().__init__(1)

    def victim(self):
        return 0


class LruSet(CacheSet):
    __slots__ = ("order",)

    def __init__(self, ways):
        super().__init__(ways)
        self.order = OrderedDict()  # oldest first

    def touch(self, way):
        self.order.move_to_end(way)

    def inserted(self, way):
        self.order[way] = None

    def removed(self, way):
        del self.order[way]

    def victim(self):
        return next(iter(self.order))


class FifoSet(LruSet):
    __slots__ = ()

    def touch(self, way):
        pass


class TwoQSet(CacheSet):
    """Simplified 2Q without the A1out ghost list.

    New pages enter the FIFO admission queue ``a1in``; a hit there promotes
    the page to the LRU main queue ``am``.
    """

    __slots__ = ("a1in", "am", "kin")

    def __init__(self, ways, in_fraction=0.25):
        super().__init__(ways)
        self.kin = max(1, int(ways * in_fraction))
        self.a1in = OrderedDict()
        self.am = OrderedDict()

    def touch(self, way):
        if way in self.a1in:
            del self.a1in[way]
        self.am[way] = None
        self.am.move_to_end(way)

    def inserted(self, way):
        self.a1in[way] = None

    def removed(self, way):
        if way in self.a1in:
            del self.a1in[way]
        else:
            del self.am[way]

    def victim(self):
        if len(self.a1in) > self.kin or not self.am:
            return next(iter(self.a1in))
        return next(iter(self.am))


class LfruSet(CacheSet):
    """Lowest frequency first, least recent among equals.

    Frequencies halve (integer division) on every ``aging_period``-th access
    to the set, counted before the access itself is applied.
    """

    __slots__ = ("freq", "last", "clock", "accesses", "aging_period")

    def __init__(self, ways, aging_period=1024):
        super().__init__(ways)
        self.freq = [0] * ways
        self.last = [0] * ways
        self.clock = 0
        self.accesses = 0
        self.aging_period = aging_period

    def on_access(self):
        self.accesses += 1
        if self.aging_period and self.accesses % self.aging_period == 0:
            self.freq = [f // 2 for f in self.freq]

    def touch(self, way):
        self.clock += 1
        self.freq[way] += 1
        self.last[way] = self.clock

    def inserted(self, way):
        self.clock += 1
        self.freq[way] = 1
        self.last[way] = self.clock

    def victim(self):
        return min(self.where.values(), key=lambda w: (self.freq[w], self.last[w]))


def make_set(policy: PolicyKind, ways: int, *, twoq_in_fraction=0.25, lfru_aging=1024):
    policy = PolicyKind(policy)
    if policy is PolicyKind.DIRECT:
        return DirectSet(ways)
    if policy is PolicyKind.LRU:
        return LruSet(ways)
    if policy is PolicyKind.FIFO:
        return FifoSet(ways)
    if policy is PolicyKind.TWOQ:
        return TwoQSet(ways, twoq_in_fraction)
    return LfruSet(ways, lfru_aging)
