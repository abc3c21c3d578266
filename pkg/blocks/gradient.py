"""
Gradient blocks: self-stabilizing distance estimates towards sources.

Hop counts saturate at HOPS_INF, which also marks unreachable devices.
"""

from typing import Any, Tuple

from calculus.builtins import aggregate, map_hood, min_hood, nbr, nbr_uid
from calculus.context import RoundContext
from calculus.field import DeviceId, NbrField

HOPS_INF = 0xFFFF
NO_REGION = 0xFFFFFFFF


def hops_inc(hops: int) -> int:
    """Add one hop, saturating at HOPS_INF."""
    return HOPS_INF if hops >= HOPS_INF - 1 else hops + 1


@aggregate
def abf_hops(ctx: RoundContext, is_source: bool) -> int:
    """
    Hop count to the nearest source (adaptive Bellman-Ford).

    Args:
        ctx: Round context
        is_source: Whether this device is a source

    Returns:
        0 at sources, HOPS_INF when no source is reachable
    """
    def relax(hops: NbrField) -> int:
        if is_source:
            return 0
        return hops_inc(min_hood(ctx, hops, HOPS_INF))

    return nbr(ctx, HOPS_INF, relax)


@aggregate
def abf_distance(ctx: RoundContext, is_source: bool, metric: NbrField, inf: Any = float("inf")) -> Any:
    """
    Metric distance to the nearest source over a neighbour distance field.

    Args:
        ctx: Round context
        is_source: Whether this device is a source
        metric: Field of distances to neighbours
        inf: Value meaning unreachable; sums are capped at it

    Returns:
        Distance estimate
    """
    def relax(distances: NbrField) -> Any:
        if is_source:
            return 0
        through = map_hood(ctx, lambda d, m: inf if d >= inf or m >= inf else min(d + m, inf), distances, metric)
        return min_hood(ctx, through, inf)

    return nbr(ctx, inf, relax)


@aggregate
def gradient_parent(ctx: RoundContext, distance: Any) -> DeviceId:
    """
    Neighbour closest to the source, ties broken by id; self when it is closest.

    Args:
        ctx: Round context
        distance: This device's gradient value

    Returns:
        Parent device id
    """
    ranked = map_hood(ctx, lambda d, uid: (d, uid), nbr(ctx, distance), nbr_uid(ctx))
    return min_hood(ctx, ranked)[1]


@aggregate
def sink_region(ctx: RoundContext, is_sink: bool) -> Tuple[int, DeviceId]:
    """
    Hop distance to the closest sink and that sink's id.

    Args:
        ctx: Round context
        is_sink: Whether this device is a sink

    Returns:
        (hops, sink id); (HOPS_INF, NO_REGION) when no sink is reachable
    """
    def relax(regions: NbrField) -> Tuple[int, DeviceId]:
        if is_sink:
            return 0, ctx.device
        hops, sink = min_hood(ctx, regions, (HOPS_INF, NO_REGION))
        if hops >= HOPS_INF - 1:
            return HOPS_INF, NO_REGION
        return hops + 1, sink

    return nbr(ctx, (HOPS_INF, NO_REGION), relax)


@aggregate
def closest_sink(ctx: RoundContext, is_sink: bool) -> DeviceId:
    """
    Region assignment: the sink minimizing (hops, sink id).

    Returns:
        Sink id, or NO_REGION when unreachable
    """
    return sink_region(ctx, is_sink)[1]
