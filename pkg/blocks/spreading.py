"""
Spreading block: propagate a value outward from the sources of a gradient.
"""

from typing import Any

from calculus.builtins import aggregate, map_hood, min_hood, nbr
from calculus.context import RoundContext
from calculus.field import NbrField


@aggregate
def broadcast(ctx: RoundContext, distance: Any, value: Any) -> Any:
    """
    Value held by the neighbour closest to the source.

    Each device offers (distance, value) and adopts the value of the minimal
    pair in its neighbourhood, so the source's value flows down the gradient.
    The device's own pair is always the current one, so a source answers with
    its current value from the first round it becomes a source. Devices equally close to several sources get the smallest of their values.

    Args:
        ctx: Round context
        distance: Gradient value of this device
        value: Value offered by this device (relevant at sources)

    Returns:
        The value adopted this round
    """
    def adopt(values: NbrField) -> Any:
        offers = map_hood(ctx, lambda d, v: (d, v), nbr(ctx, distance), values)
        return min_hood(ctx, offers, (distance, value))[1]

    return nbr(ctx, value, adopt)
