"""
Simulation events and the priority queue ordering them.
"""

import heapq
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Any, List


class EventKind(IntEnum):
    """At equal times, nodes move first, then exports land, then rounds run."""
    MOBILITY = 0
    DELIVERY = 1
    ROUND = 2


@dataclass(frozen=True, order=True)
class Event:
    """
    A scheduled event, totally ordered by (time, kind, target, sender).

    Attributes:
        time: Simulated time in seconds
        kind: Event kind
        target: Device the event applies to (0 for mobility ticks)
        sender: Sending device of a delivery, -1 otherwise
        payload: Delivered export; not part of the ordering
    """
    time: float
    kind: EventKind
    target: int
    sender: int = -1
    payload: Any = field(default=None, compare=False)


class EventQueue:
    """
    Min-heap of events. Pop order does not depend on push order.
    """

    def __init__(self):
        self._heap: List[Event] = []

    def __len__(self) -> int:
        return len(self._heap)

    def push(self, event: Event) -> None:
        heapq.heappush(self._heap, event)

    def pop(self) -> Event:
        return heapq.heappop(self._heap)
