from .dram_cache import CacheGeometry, DramCache, Hit, Miss, Victim
from .mshr import Mshr, MshrEntry, MshrOutcome
from .policies import PolicyKind

__all__ = [
    "CacheGeometry", "DramCache", "Hit", "Miss", "Victim",
    "Mshr", "MshrEntry", "MshrOutcome", "PolicyKind",
]
