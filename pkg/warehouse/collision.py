"""
Collision avoidance service.

Every forklift spawns a process keyed by its own id. The process spreads
along a metric gradient from the forklift and stops at the safety radius.
Inside that bubble the distance of every other forklift is collected
towards the origin, which warns when the closest one approaches faster than
the threshold. Gradient, parent pointer and partial minimum travel together
in one shared state entry per bubble.
"""

import math
from typing import Any, Optional, Tuple

from calculus.builtins import nbr, nbr_dist, old
from calculus.context import RoundContext
from calculus.field import DeviceId, NbrField
from calculus.processes import Status, spawn

DIST_INF = 0xFFFFFFFF


def to_centimetres(metres: float) -> int:
    """Quantise a distance; infinite distances map to DIST_INF."""
    if math.isinf(metres):
        return DIST_INF
    return min(int(round(metres * 100)), DIST_INF)


def approaching(previous: Optional[Tuple[int, float]], current: Tuple[int, float], threshold: float) -> bool:
    """
    Whether a distance shrank faster than the threshold.

    Args:
        previous: (distance in cm, time) of the previous round, if any
        current: (distance in cm, time) of this round
        threshold: Closing speed in m/s above which to warn

    Returns:
        True if both distances are known and closing speed > threshold
    """
    if previous is None:
        return False
    (before, t0), (now, t1) = previous, current
    if before >= DIST_INF or now >= DIST_INF or t1 <= t0:
        return False
    return (before - now) / 100.0 / (t1 - t0) > threshold


BubbleState = Tuple[int, DeviceId, Optional[int]]


def relax_bubble(ctx: RoundContext, states: NbrField, at_origin: bool, is_forklift: bool) -> BubbleState:
    """
    One step of the bubble's shared state: (distance, parent, closest).

    The distance is the metric gradient from the origin in centimetres and
    the parent is the neighbour it was relaxed through (ties by id). The
    closest entry collects, along parent pointers, the minimum distance of
    any forklift below this device, None when there is none.

    Args:
        ctx: Round context
        states: Neighbours' states from their previous round
        at_origin: Whether this device started the bubble
        is_forklift: Whether this device is a forklift

    Returns:
        The new state of this device
    """
    metric = nbr_dist(ctx)
    distance, parent = (0 if at_origin else DIST_INF), ctx.device
    if not at_origin:
        for device, state in states.neighbours():
            hop = to_centimetres(metric[device])
            if hop >= DIST_INF or state[0] >= DIST_INF:
                continue
            through = min(state[0] + hop, DIST_INF)
            if through < distance:
                distance, parent = through, device

    closest = distance if is_forklift and not at_origin else DIST_INF
    for device, state in states.neighbours():
        if state[1] == ctx.device and state[2] is not None:
            closest = min(closest, state[2])
    return distance, parent, closest if closest < DIST_INF else None


def collision_process(ctx: RoundContext, origin: int, is_forklift: bool, radius_cm: int,
                      threshold: float) -> Tuple[Any, Status]:
    """
    Body of the collision bubble of one forklift.

    Returns:
        (warning, internal output) at the origin, (None, internal) inside
        the radius, (None, external) beyond it
    """
    at_origin = ctx.device == origin
    distance, _, closest = nbr(ctx, None, lambda states: relax_bubble(ctx, states, at_origin, is_forklift))
    if not at_origin:
        return None, Status.EXTERNAL if distance > radius_cm else Status.INTERNAL

    current = (DIST_INF if closest is None else closest, ctx.sensors.time)
    previous = old(ctx, None, current)
    return approaching(previous, current, threshold), Status.INTERNAL_OUTPUT


def collision_service(ctx: RoundContext, is_forklift: bool, safety_radius: float, threshold: float) -> bool:
    """
    Collision warning of this device.

    Args:
        ctx: Round context
        is_forklift: Whether this device is a forklift
        safety_radius: Bubble radius in metres
        threshold: Closing speed in m/s that triggers a warning

    Returns:
        True if this device is a forklift and another forklift in its
        bubble approaches too fast
    """
    keys = [ctx.device] if is_forklift else []
    outputs = spawn(ctx, collision_process, keys, is_forklift, to_centimetres(safety_radius), threshold)
    return bool(outputs.get(ctx.device, False))
