"""
Simulated devices and their movement.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from calculus.export import Export

Point = Tuple[float, float]


class Role(str, Enum):
    PALLET = "fixed-pallet"
    FORKLIFT = "forklift"
    SINK_1 = "sink-group-1"
    SINK_2 = "sink-group-2"


@dataclass
class NodeState:
    """
    One simulated device.

    Attributes:
        id: Device id
        role: Device role
        position: Coordinates in metres
        velocity: Velocity in m/s; followed only when there are no waypoints
        period: Seconds between rounds
        phase: Offset of the first round
        waypoints: Remaining points to visit, in order
        speed: Cruise speed along waypoints in m/s
        carried_by: Forklift carrying this pallet, if any
        round: Rounds executed so far
        last_export: Export of the latest round
        inbox: Latest export received from each neighbour
    """
    id: int
    role: Role
    position: Point
    velocity: Point = (0.0, 0.0)
    period: float = 1.0
    phase: float = 0.0
    waypoints: List[Point] = field(default_factory=list)
    speed: float = 0.0
    carried_by: Optional[int] = None
    round: int = 0
    last_round_time: Optional[float] = None
    last_export: Optional[Export] = None
    inbox: Dict[int, Export] = field(default_factory=dict)

    def __post_init__(self):
        if self.period <= 0:
            raise ValueError(f"Node {self.id}: period must be > 0")

    @property
    def mobile(self) -> bool:
        return self.role == Role.FORKLIFT

    @property
    def idle(self) -> bool:
        return not self.waypoints and self.velocity == (0.0, 0.0)


def mobility_step(node: NodeState, dt: float, max_speed: float) -> NodeState:
    """
    Advance a forklift by dt seconds.

    Along waypoints the forklift moves at min(speed, max_speed), consuming
    reached waypoints; without waypoints it follows its velocity, clamped to
    max_speed. Other roles are returned unchanged.

    Args:
        node: Node to move
        dt: Time step in seconds
        max_speed: Speed limit in m/s

    Returns:
        The moved node (a new object when the node moved)
    """
    if not node.mobile or dt <= 0:
        return node

    position = np.asarray(node.position, dtype=float)
    if not node.waypoints:
        velocity = np.asarray(node.velocity, dtype=float)
        speed = float(np.linalg.norm(velocity))
        if speed == 0.0:
            return node
        if speed > max_speed:
            velocity = velocity * (max_speed / speed)
        moved = position + velocity * dt
        return replace(node, position=_point(moved), velocity=_point(velocity))

    speed = min(node.speed or max_speed, max_speed)
    budget = speed * dt
    waypoints = list(node.waypoints)
    heading = np.zeros(2)
    while waypoints and budget > 0:
        target = np.asarray(waypoints[0], dtype=float)
        offset = target - position
        gap = float(np.linalg.norm(offset))
        if gap <= budget:
            position = target
            budget -= gap
            waypoints.pop(0)
            if gap > 0:
                heading = offset / gap
            continue
        heading = offset / gap
        position = position + heading * budget
        budget = 0.0
    velocity = heading * speed if waypoints else np.zeros(2)
    return replace(node, position=_point(position), velocity=_point(velocity), waypoints=waypoints)


def _point(vector: np.ndarray) -> Point:
    return float(vector[0]), float(vector[1])
