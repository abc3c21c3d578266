"""
Random task stream of a forklift: inserts and retrievals drawn during idle time.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, List

import numpy as np

from warehouse.goods import Good, GoodsCatalog


class TaskKind(str, Enum):
    IDLE = "idle"
    INSERT = "insert"
    RETRIEVE = "retrieve"


@dataclass(frozen=True)
class Task:
    """
    A forklift task.

    Attributes:
        kind: insert or retrieve
        good: Good to load (insert) or to look for (retrieve)
    """
    kind: TaskKind
    good: Good

    def __str__(self) -> str:
        return f"{self.kind.value}({self.good.kind})"


class TaskGenerator:
    """
    Seeded task source for one forklift.

    Each forklift draws from its own generator seeded with (seed, forklift),
    so its stream does not depend on what other forklifts do.
    """

    def __init__(self, seed: int, forklift: int, catalog: GoodsCatalog, idle_min: float = 1.0,
                 idle_max: float = 10.0):
        """
        Initialize the generator.

        Args:
            seed: Run seed
            forklift: Forklift id
            catalog: Distribution of goods
            idle_min: Shortest idle time in seconds
            idle_max: Longest idle time in seconds
        """
        self.rng = np.random.default_rng([seed, forklift])
        self.catalog = catalog
        self.idle_min = idle_min
        self.idle_max = idle_max

    def idle_time(self) -> float:
        return float(self.rng.uniform(self.idle_min, self.idle_max))

    def next_task(self) -> Task:
        """Insert or retrieve with equal probability, good drawn from the catalog."""
        kind = TaskKind.INSERT if self.rng.random() < 0.5 else TaskKind.RETRIEVE
        return Task(kind, self.catalog.draw(self.rng))

    def __iter__(self) -> Iterator[Task]:
        while True:
            yield self.next_task()

    def take(self, count: int) -> List[Task]:
        return [self.next_task() for _ in range(count)]


def task_generator(seed: int, forklift: int, catalog: GoodsCatalog) -> Iterator[Task]:
    """Endless task stream of a forklift."""
    return iter(TaskGenerator(seed, forklift, catalog))
