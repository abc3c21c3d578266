"""
Proximity network: who hears whom, and which messages get lost.

Sensing and delivery share one radius rule, `in_range`, so a device's
neighbour distances and the recipients of its broadcast always agree.
"""

from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np

from calculus.export import Export, message_size
from calculus.field import NbrField
from simulator.node import NodeState
from utils.logger import setup_logger

logger = setup_logger("simulator.network")

__all__ = ["Network", "deliver", "in_range", "message_size"]


def in_range(origin: Sequence[float], positions: np.ndarray, comm_radius: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Distances from a point to many positions and which of them are in range.

    Args:
        origin: (x, y) in metres
        positions: Matrix of shape (n, 2)
        comm_radius: Radio range in metres

    Returns:
        (distances, boolean mask of distances <= comm_radius)
    """
    gaps = np.hypot(*(positions - np.asarray(origin, dtype=float)).T)
    return gaps, gaps <= comm_radius


def deliver(export: Export, sender: NodeState, nodes: Iterable[NodeState], comm_radius: float, drop_rate: float,
            rng: np.random.Generator) -> List[int]:
    """
    Recipients of a broadcast export.

    Every other node within comm_radius of the sender receives the export
    unless dropped, each with probability drop_rate. Candidates draw from
    the generator in increasing id order.

    Args:
        export: Export being sent
        sender: Sending node, at its position at send time
        nodes: All nodes
        comm_radius: Radio range in metres
        drop_rate: Independent loss probability per recipient
        rng: Seeded generator

    Returns:
        Sorted ids of the nodes receiving the export
    """
    others = sorted((node for node in nodes if node.id != sender.id), key=lambda node: node.id)
    if not others:
        return []
    positions = np.array([node.position for node in others], dtype=float).reshape(-1, 2)
    _, close = in_range(sender.position, positions, comm_radius)
    candidates = [node.id for node, heard in zip(others, close) if heard]
    recipients = _survivors(candidates, drop_rate, rng)
    logger.debug(f"Export {export.device}/{export.round}: {export.size} bytes, "
                 f"{len(recipients)} of {len(candidates)} in range")
    return recipients


def _survivors(candidates: List[int], drop_rate: float, rng: np.random.Generator) -> List[int]:
    if not candidates or drop_rate <= 0.0:
        return candidates
    kept = rng.random(len(candidates)) >= drop_rate
    return [device for device, keep in zip(candidates, kept) if keep]


class Network:
    """
    Position index over the simulated nodes, used for distance sensing.

    Positions are cached as a numpy matrix and refreshed after nodes move.
    """

    def __init__(self, nodes: Mapping[int, NodeState], comm_radius: float):
        """
        Initialize the network.

        Args:
            nodes: Live mapping of device id to node; updated by the simulator
            comm_radius: Radio range in metres
        """
        self.nodes = nodes
        self.comm_radius = comm_radius
        self._ids = np.array([], dtype=np.int64)
        self._positions = np.zeros((0, 2))
        self.refresh()

    def refresh(self) -> None:
        """Re-read node positions."""
        ids = sorted(self.nodes)
        self._ids = np.array(ids, dtype=np.int64)
        self._positions = np.array([self.nodes[i].position for i in ids], dtype=float).reshape(-1, 2)

    def distances_from(self, device: int) -> Dict[int, float]:
        """
        Distances to every node within range, the device itself included at 0.

        Args:
            device: Device id

        Returns:
            Mapping of device id to distance in metres
        """
        gaps, close = in_range(self.nodes[device].position, self._positions, self.comm_radius)
        distances = {int(self._ids[i]): float(gaps[i]) for i in np.nonzero(close)[0]}
        distances[device] = 0.0
        return distances

    def distance_field(self, device: int) -> NbrField:
        return NbrField(device, self.distances_from(device), float("inf"))
