"""
Routing service: guide a forklift towards an empty space or a good.

Each query is a process keyed by (requester, seq, target) where target is a
good kind or EMPTY_SPACE. Every device in the process keeps one shared state
(hops to the closest source, hops to the requester, path pointer, source
id). A device on the path publishes its parent as pointer, None otherwise,
so the path follows parent pointers from the requester towards the source,
and pallets on that chain within led_radius hops of the requester light
their led.
"""

from typing import Any, Dict, Hashable, Iterable, Mapping, NamedTuple, Optional, Tuple

from blocks.gradient import HOPS_INF, NO_REGION, hops_inc
from calculus.builtins import nbr
from calculus.context import RoundContext
from calculus.field import NbrField
from calculus.processes import Status, spawn
from simulator.node import Role
from warehouse.goods import EMPTY_SPACE, Led

QueryKey = Tuple[int, int, int]
RouteState = Tuple[int, int, Optional[int], Optional[int]]

ROUTE_UNKNOWN: RouteState = (HOPS_INF, HOPS_INF, None, None)


class RouteHint(NamedTuple):
    """What the requester learns: its distance, next hop and the chosen source."""
    hops: int
    parent: int
    source: int

    @property
    def reachable(self) -> bool:
        return self.hops < HOPS_INF


def is_route_source(inputs: Mapping[str, Any], key: QueryKey) -> bool:
    """
    Whether a device answers a query.

    Pallets answer an empty-space query when a free slot is next to them,
    and a good query when they hold that good. Pallets being carried or
    reserved by another forklift never answer.
    """
    requester, _, target = key
    if inputs.get("role") != Role.PALLET.value or inputs.get("handling"):
        return False
    claimed = inputs.get("claimed_by")
    if claimed is not None and claimed != requester:
        return False
    if target == EMPTY_SPACE:
        return bool(inputs.get("vacant_adjacent"))
    return inputs.get("content") == target


def route_process(ctx: RoundContext, key: QueryKey, led_radius: int) -> Tuple[Any, Status]:
    requester = key[0]
    inputs = ctx.inputs
    is_requester = ctx.device == requester
    if is_requester and key in inputs.get("cancelled", ()):
        return None, Status.TERMINATED
    source = is_route_source(inputs, key)
    parent, on_path = ctx.device, False

    def relax(states: NbrField) -> RouteState:
        nonlocal parent, on_path
        best, found, nearest_requester, pointed = HOPS_INF, None, HOPS_INF, False
        for device, (hops, req_hops, pointer, origin) in states.neighbours():
            if hops < best:
                best, parent, found = hops, device, origin
            nearest_requester = min(nearest_requester, req_hops)
            pointed = pointed or pointer == ctx.device
        if source:
            hops, parent, found = 0, ctx.device, ctx.device
        else:
            hops = hops_inc(best)
        req_hops = 0 if is_requester else hops_inc(nearest_requester)
        on_path = hops < HOPS_INF and req_hops <= led_radius and (is_requester or pointed)
        return hops, req_hops, parent if on_path else None, found

    hops, _, _, found = nbr(ctx, ROUTE_UNKNOWN, relax)
    if is_requester:
        if hops >= HOPS_INF:
            return RouteHint(HOPS_INF, ctx.device, NO_REGION), Status.INTERNAL_OUTPUT
        return RouteHint(hops, parent, found), Status.INTERNAL_OUTPUT

    if inputs.get("role") != Role.PALLET.value:
        return None, Status.INTERNAL
    if source and inputs.get("picking") == requester:
        return Led.BLINK, Status.INTERNAL_OUTPUT
    if on_path and not source:
        return Led.ON, Status.INTERNAL_OUTPUT
    return None, Status.INTERNAL


def combine_leds(leds: Iterable[Led]) -> Led:
    """Blink beats on beats off."""
    leds = set(leds)
    if Led.BLINK in leds:
        return Led.BLINK
    if Led.ON in leds:
        return Led.ON
    return Led.OFF


def routing_service(ctx: RoundContext, queries: Iterable[Hashable], led_radius: int) -> Tuple[Dict[QueryKey, RouteHint], Led]:
    """
    Run every routing query this device takes part in.

    Args:
        ctx: Round context; inputs carry the pallet state or the forklift's
            cancelled queries
        queries: Keys of the queries this device starts
        led_radius: Hops from the requester within which leds light up

    Returns:
        (hints for the queries this device requested, led state)
    """
    outputs = spawn(ctx, route_process, list(queries), led_radius)
    hints = {key: value for key, value in outputs.items() if isinstance(value, RouteHint)}
    led = combine_leds(value for value in outputs.values() if isinstance(value, Led))
    return hints, led
