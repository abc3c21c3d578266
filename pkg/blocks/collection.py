"""
Collection blocks: accumulate values towards the sources of a gradient.

`sp_collection` follows a single parent per device. `redundant_collect`
gossips log identifiers towards the closest sink of two sink groups at once,
each device relaying what it sees farther from the sink than itself unless
it already sees it closer.
"""

from typing import Any, Callable, FrozenSet, Hashable, Iterable, Optional

from blocks.gradient import HOPS_INF, gradient_parent
from calculus.builtins import aggregate, fold_hood, map_hood, mux, nbr, old
from calculus.context import RoundContext
from calculus.field import NbrField

EMPTY: FrozenSet[Hashable] = frozenset()


@aggregate
def sp_collection(ctx: RoundContext, distance: Any, value: Any, null: Any,
                  accumulate: Callable[[Any, Any], Any]) -> Any:
    """
    Single-path collection towards the gradient source.

    Every device folds its own value with the partial results of the
    neighbours that chose it as parent.

    Args:
        ctx: Round context
        distance: Gradient value of this device
        value: Local contribution
        null: Identity element of accumulate
        accumulate: Commutative, associative accumulation function

    Returns:
        The partial accumulation at this device; the full one at the source
    """
    def gather(partials: NbrField) -> Any:
        parent = gradient_parent(ctx, distance)
        is_child = map_hood(ctx, lambda p: p == ctx.device, nbr(ctx, parent))
        return fold_hood(ctx, accumulate, mux(ctx, is_child, partials, null), value)

    return nbr(ctx, null, gather)


@aggregate
def gossip_collect(ctx: RoundContext, distance: int, local: Iterable[Hashable], is_sink: bool) -> FrozenSet[Hashable]:
    """
    Multi-path relay of item ids towards the closest sink.

    A device offers (distance, ids). Its ids are its own pending items plus
    every id a farther neighbour offers, minus every id a closer neighbour
    already offers. Own items seen closer are released for good.

    Args:
        ctx: Round context
        distance: Hop distance to the closest sink of the group
        local: Ids of items created here and still retained
        is_sink: Whether this device absorbs items

    Returns:
        Ids delivered at this device this round (empty unless is_sink)
    """
    local = frozenset(local)
    delivered = EMPTY

    def relay(offers: NbrField):
        nonlocal delivered
        farther, closer = EMPTY, EMPTY
        for _, (hops, ids) in offers.neighbours():
            if hops > distance:
                farther = farther | ids
            elif hops < distance:
                closer = closer | ids
        released = old(ctx, EMPTY, lambda before: (before | (local & closer)) & local)
        pending = local - released
        if is_sink:
            delivered = pending | farther
        return distance, (pending | farther) - closer

    nbr(ctx, (HOPS_INF, EMPTY), relay)
    return delivered


@aggregate
def redundant_collect(ctx: RoundContext, group1_dist: int, group2_dist: int, local_logs: Iterable[Hashable],
                      sink_group: Optional[int] = None) -> FrozenSet[Hashable]:
    """
    Collect log ids towards the closest sink of each of two sink groups.

    Args:
        ctx: Round context
        group1_dist: Hop distance to the closest group-1 sink
        group2_dist: Hop distance to the closest group-2 sink
        local_logs: Ids of logs retained at this device
        sink_group: 1 or 2 when this device is a sink of that group

    Returns:
        Ids delivered at this device this round
    """
    local_logs = frozenset(local_logs)
    first = gossip_collect(ctx, group1_dist, local_logs, sink_group == 1)
    second = gossip_collect(ctx, group2_dist, local_logs, sink_group == 2)
    return first | second
