"""Miss status holding registers keyed by 4 KB page number."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from ..errors import MshrError


class MshrOutcome(Enum):
    NEW_MISS = "new"
    COALESCED = "coalesced"
    STALL = "stall"


@dataclass
class MshrEntry:
    page_number: int
    targets: list = field(default_factory=list)
    issued: bool = False


class Mshr:
    def __init__(self, capacity: int = 32):
        if capacity < 1:
            raise ValueError("MSHR needs at least one entry")
        self.capacity = capacity
        self.entries: dict[int, MshrEntry] = {}

    def __len__(self):
        return len(self.entries)

    def __contains__(self, page):
        return page in self.entries

    @property
    def full(self):
        return len(self.entries) >= self.capacity

    def register(self, page: int, request_id: int) -> MshrOutcome:
        entry = self.entries.get(page)
        if entry is not None:
            if request_id in entry.targets:
                raise MshrError(f"request {request_id} already waits on page {page}")
            entry.targets.append(request_id)
            return MshrOutcome.COALESCED
        if self.full:
            return MshrOutcome.STALL
        self.entries[page] = MshrEntry(page, [request_id])
        return MshrOutcome.NEW_MISS

    def issue(self, page: int) -> None:
        try:
            self.entries[page].issued = True
        except KeyError:
            raise MshrError(f"no MSHR entry for page {page}") from None

    def complete(self, page: int) -> list:
        """Retire the entry; returns waiting request ids in arrival order."""
        entry = self.entries.get(page)
        if entry is None:
            raise MshrError(f"no MSHR entry for page {page}")
        if not entry.issued:
            raise MshrError(f"MSHR entry for page {page} was never issued")
        del self.entries[page]
        return entry.targets
