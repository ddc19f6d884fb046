"""Set-associative DRAM page cache in front of the SSD.

Pages are 4 KB, write-back and write-allocate.  The timed path in
:mod:`cxlssdsim.system` uses :meth:`DramCache.probe` and
:meth:`DramCache.fill` separately so the fill can land after the flash
read; :meth:`DramCache.access` is the same thing done atomically.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from ..stats import AccessKind
from .mshr import Mshr
from .policies import PolicyKind, make_set

PAGE_SIZE = 4096


@dataclass(frozen=True)
class CacheGeometry:
    capacity: int = 16 * 2**20
    page_size: int = PAGE_SIZE
    ways: int = 8

    def __post_init__(self):
        if self.capacity <= 0 or self.ways <= 0 or self.page_size <= 0:
            raise ValueError("cache geometry values must be positive")
        if self.capacity % (self.page_size * self.ways):
            raise ValueError("capacity must be a multiple of page_size * ways")
        n = self.num_sets
        if n & (n - 1):
            raise ValueError(f"number of sets ({n}) must be a power of two")

    @property
    def num_sets(self):
        return self.capacity // (self.page_size * self.ways)

    @property
    def num_pages(self):
        return self.capacity // self.page_size

    def for_policy(self, policy) -> "CacheGeometry":
        if PolicyKind(policy) is PolicyKind.DIRECT and self.ways != 1:
            return CacheGeometry(self.capacity, self.page_size, 1)
        return self


@dataclass(frozen=True)
class Victim:
    page: int
    dirty: bool
    data: Optional[bytearray] = None


@dataclass(frozen=True)
class Hit:
    pass


@dataclass(frozen=True)
class Miss:
    victim: Optional[Victim] = None


class DramCache:
    def __init__(self, geometry: CacheGeometry = CacheGeometry(), policy=PolicyKind.LRU,
                 mshr_entries: int = 32, *, twoq_in_fraction=0.25, lfru_aging=1024):
        self.policy = PolicyKind(policy)
        self.geometry = geometry.for_policy(self.policy)
        self.sets = [make_set(self.policy, self.geometry.ways,
                              twoq_in_fraction=twoq_in_fraction, lfru_aging=lfru_aging)
                     for _ in range(self.geometry.num_sets)]
        self._mask = self.geometry.num_sets - 1
        self.mshr = Mshr(mshr_entries)
        # page -> bytearray, or None for a page that has only ever held zeros
        self.data: dict[int, Optional[bytearray]] = {}

    def set_index(self, page: int) -> int:
        return page & self._mask

    def __contains__(self, page):
        return page in self.data

    def __len__(self):
        return len(self.data)

    def probe(self, page: int) -> bool:
        """One tag lookup. Counts toward LFRU aging; a hit refreshes the page."""
        s = self.sets[page & self._mask]
        s.on_access()
        way = s.where.get(page)
        if way is None:
            return False
        s.touch(way)
        return True

    def touch(self, page: int) -> None:
        s = self.sets[page & self._mask]
        s.touch(s.where[page])

    def evict_victim(self, set_index: int) -> int:
        """Way the policy would evict from a full set."""
        return self.sets[set_index].victim()

    def fill(self, page: int, data: Optional[bytearray] = None) -> Optional[Victim]:
        """Install ``page`` clean, evicting per policy if its set is full."""
        s = self.sets[page & self._mask]
        if page in s.where:
            raise ValueError(f"page {page} already cached")
        way = s.free_way()
        victim = None
        if way is None:
            way = s.victim()
            dirty = s.dirty[way]
            old = s.remove(way)
            victim = Victim(old, dirty, self.data.pop(old))
        s.place(way, page)
        self.data[page] = data
        return victim

    def is_dirty(self, page: int) -> bool:
        s = self.sets[page & self._mask]
        return s.dirty[s.where[page]]

    def mark_dirty(self, page: int) -> None:
        s = self.sets[page & self._mask]
        s.dirty[s.where[page]] = True

    def access(self, addr: int, kind=AccessKind.READ):
        """Atomic lookup-and-allocate; returns ``Hit()`` or ``Miss(victim)``."""
        page = addr // self.geometry.page_size
        if self.probe(page):
            result = Hit()
        else:
            result = Miss(self.fill(page))
        if AccessKind(kind) is AccessKind.WRITE:
            self.mark_dirty(page)
        return result

    def dirty_pages(self):
        return sorted(p for s in self.sets for w, p in enumerate(s.tags)
                      if p is not None and s.dirty[w])

    def flush_all(self, writeback: Optional[Callable[[int, Optional[bytearray]], None]] = None) -> int:
        """Write back every dirty page (in page order) and clear its dirty bit."""
        pages = self.dirty_pages()
        for page in pages:
            if writeback is not None:
                writeback(page, self.data[page])
            s = self.sets[page & self._mask]
            s.dirty[s.where[page]] = False
        return len(pages)
