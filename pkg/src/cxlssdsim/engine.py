"""Discrete-event engine.

Time is kept in integer ticks of one picosecond, so every nanosecond
parameter converts exactly.  Events with the same due time dispatch in the
order they were scheduled.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Any, Callable

from .errors import EventBudgetExceeded, SimulationError

TICKS_PER_NS = 1000
DEFAULT_MAX_EVENTS = 10**9


def ns(value) -> int:
    """Convert a nanosecond quantity to ticks, refusing anything inexact."""
    ticks = value * TICKS_PER_NS
    if isinstance(ticks, float):
        if not ticks.is_integer():
            raise ValueError(f"{value} ns is not a whole number of picoseconds")
        ticks = int(ticks)
    if ticks < 0:
        raise ValueError(f"negative duration {value} ns")
    return ticks


def to_ns(ticks: int) -> float:
    return ticks / TICKS_PER_NS


@dataclass(order=True)
class Event:
    due: int
    sequence: int = 0
    action: Callable[..., Any] = field(default=None, compare=False)
    args: tuple = field(default=(), compare=False)


class Engine:
    """Single-threaded event loop. Instances share no state."""

    def __init__(self, max_events: int = DEFAULT_MAX_EVENTS):
        self.now = 0
        self.max_events = max_events
        self.dispatched = 0
        self._queue: list = []
        self._seq = 0

    def __len__(self):
        return len(self._queue)

    def schedule(self, event: Event) -> Event:
        """Queue a prebuilt event; its sequence number is reassigned."""
        if event.due < self.now:
            raise SimulationError(
                f"event scheduled in the past (due={event.due}, now={self.now})")
        event.sequence = self._seq
        self._seq += 1
        heapq.heappush(self._queue, (event.due, event.sequence, event.action, event.args))
        return event

    def at(self, due: int, action: Callable[..., Any], *args) -> None:
        if due < self.now:
            raise SimulationError(f"event scheduled in the past (due={due}, now={self.now})")
        heapq.heappush(self._queue, (due, self._seq, action, args))
        self._seq += 1

    def after(self, delay: int, action: Callable[..., Any], *args) -> None:
        self.at(self.now + delay, action, *args)

    def step(self) -> bool:
        if not self._queue:
            return False
        if self.dispatched >= self.max_events:
            raise EventBudgetExceeded(
                f"event budget of {self.max_events} exhausted at t={self.now} ps "
                f"with {len(self._queue)} events pending")
        due, _, action, args = heapq.heappop(self._queue)
        self.now = due
        self.dispatched += 1
        action(*args)
        return True

    def run_until_idle(self) -> int:
        """Dispatch until the queue drains; returns the final clock in ticks."""
        queue = self._queue
        pop = heapq.heappop
        budget = self.max_events
        while queue:
            if self.dispatched >= budget:
                raise EventBudgetExceeded(
                    f"event budget of {budget} exhausted at t={self.now} ps "
                    f"with {len(queue)} events pending")
            due, _, action, args = pop(queue)
            self.now = due
            self.dispatched += 1
            action(*args)
        return self.now
