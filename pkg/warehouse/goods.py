"""
Goods stored on pallets and the distribution their kinds are drawn from.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

EMPTY_SPACE = 0


@dataclass(frozen=True)
class Good:
    """A type of good; kinds are numbered from 1."""
    kind: int

    def __post_init__(self):
        if self.kind < 1:
            raise ValueError(f"Good kind must be >= 1 (got {self.kind})")


def zipf_weights(kinds: int, exponent: float = 1.0) -> np.ndarray:
    """
    Probabilities of kinds 1..kinds under a Zipf law.

    Args:
        kinds: Number of kinds
        exponent: Zipf exponent s; kind k has weight 1 / k**s

    Returns:
        Array of probabilities summing to 1, decreasing with the kind
    """
    ranks = np.arange(1, kinds + 1, dtype=float)
    weights = ranks ** -exponent
    return weights / weights.sum()


class GoodsCatalog:
    """
    Draws goods from a Zipf distribution over a fixed number of kinds.
    """

    def __init__(self, kinds: int = 100, exponent: float = 1.0):
        self.kinds = kinds
        self.exponent = exponent
        self.weights = zipf_weights(kinds, exponent)

    def draw(self, rng: np.random.Generator) -> Good:
        return Good(int(rng.choice(self.kinds, p=self.weights)) + 1)

    def draw_many(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Kinds of `count` independent draws."""
        return rng.choice(self.kinds, size=count, p=self.weights) + 1


class Led(str, Enum):
    OFF = "off"
    ON = "on"
    BLINK = "blink"


@dataclass
class PalletState:
    """
    A pallet and what it holds.

    Attributes:
        id: Device id of the pallet module
        content: Good on the pallet, None when empty
        slot: Slot the pallet stands in, None while carried
        led: Current led state
        handling: Whether a forklift is carrying the pallet
        claimed_by: Forklift that reserved this pallet for a task
        picking: Forklift currently picking the pallet up
    """
    id: int
    content: Optional[Good] = None
    slot: Optional[int] = None
    led: Led = Led.OFF
    handling: bool = False
    claimed_by: Optional[int] = None
    picking: Optional[int] = None

    @property
    def kind(self) -> int:
        return self.content.kind if self.content else EMPTY_SPACE
