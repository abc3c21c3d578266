"""
The aggregate program every warehouse device runs: collision avoidance,
routing and log collection side by side.
"""

from typing import Dict, FrozenSet, Hashable, NamedTuple

from calculus.context import RoundContext
from simulator.node import Role
from utils.config import SimConfig
from warehouse.collision import collision_service
from warehouse.goods import Led
from warehouse.logs import log_service
from warehouse.routing import QueryKey, RouteHint, routing_service


class ServiceSettings(NamedTuple):
    safety_radius: float = 6.0
    approach_threshold: float = 1.0
    led_radius: int = 8

    @classmethod
    def from_config(cls, config: SimConfig) -> "ServiceSettings":
        return cls(config.safety_radius, config.approach_threshold, config.led_radius)


class NodeOutput(NamedTuple):
    """
    Result of one round of the warehouse program.

    Attributes:
        warning: Collision warning (forklifts only)
        led: Led state (pallets only)
        hints: Routing hints for the queries this device requested
        delivered: Log ids absorbed here this round
    """
    warning: bool
    led: Led
    hints: Dict[QueryKey, RouteHint]
    delivered: FrozenSet[Hashable]


def warehouse_program(ctx: RoundContext, settings: ServiceSettings = ServiceSettings()) -> NodeOutput:
    """
    Run the three warehouse services.

    App inputs read: role, sink_group, logs, queries, cancelled, and for
    pallets content, vacant_adjacent, claimed_by, handling, picking.

    Args:
        ctx: Round context
        settings: Service parameters

    Returns:
        NodeOutput
    """
    inputs = ctx.inputs
    is_forklift = inputs.get("role") == Role.FORKLIFT.value
    warning = collision_service(ctx, is_forklift, settings.safety_radius, settings.approach_threshold)
    hints, led = routing_service(ctx, inputs.get("queries", ()), settings.led_radius)
    delivered = log_service(ctx, inputs.get("logs", ()), inputs.get("sink_group"))
    return NodeOutput(warning, led, hints, delivered)
