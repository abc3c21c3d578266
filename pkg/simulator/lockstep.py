"""
Synchronous round harness over a static graph.

Every device runs one round per step and sees exactly its graph neighbours'
exports from the previous step. Used for oracle checks of blocks and
processes, where the event-driven simulator's phases would only add noise.
"""

import math
from typing import Any, Callable, Dict, Mapping, Optional

import networkx as nx

from calculus.context import RoundContext, RuntimeOptions, SensorSnapshot, execute_round
from calculus.export import Export
from calculus.field import DeviceId, NbrField
from utils.logger import setup_logger

logger = setup_logger("simulator.lockstep")

InputFn = Callable[[DeviceId, int], Mapping[str, Any]]


class LockstepNetwork:
    """
    Run an aggregate program on every node of a graph in lockstep.
    """

    def __init__(self, graph: nx.Graph, program: Callable[..., Any], options: Optional[RuntimeOptions] = None,
                 inputs: Optional[InputFn] = None):
        """
        Initialize the harness.

        Args:
            graph: Topology; node labels are device ids. Optional node attribute
                `pos` gives coordinates, optional edge attribute `weight` gives
                the sensed distance (defaults to the Euclidean distance or 1.0)
            program: Aggregate program called as program(ctx)
            options: Runtime options
            inputs: Function (device, round) -> app inputs
        """
        self.graph = graph
        self.program = program
        self.options = options or RuntimeOptions()
        self.inputs = inputs or (lambda device, round_: {})
        self.round = 0
        self.exports: Dict[DeviceId, Export] = {}
        self.results: Dict[DeviceId, Any] = {}

    def _distances(self, device: DeviceId) -> NbrField:
        values = {device: 0.0}
        here = self.graph.nodes[device].get("pos")
        for other in self.graph.neighbors(device):
            weight = self.graph.edges[device, other].get("weight")
            if weight is None:
                there = self.graph.nodes[other].get("pos")
                weight = math.dist(here, there) if here is not None and there is not None else 1.0
            values[other] = float(weight)
        return NbrField(device, values, math.inf)

    def step(self) -> Dict[DeviceId, Any]:
        """
        Execute one round on every device.

        Returns:
            Mapping from device to its program result this round
        """
        self.round += 1
        exports: Dict[DeviceId, Export] = {}
        results: Dict[DeviceId, Any] = {}
        for device in sorted(self.graph.nodes):
            inbox = {other: self.exports[other] for other in self.graph.neighbors(device) if other in self.exports}
            sensors = SensorSnapshot(
                position=tuple(self.graph.nodes[device].get("pos", (0.0, 0.0))),
                nbr_distances=self._distances(device),
                app_inputs=self.inputs(device, self.round),
                time=float(self.round),
                dt=1.0,
            )
            ctx = RoundContext(device, self.round, self.exports.get(device), inbox, sensors, self.options)
            results[device], exports[device] = execute_round(ctx, self.program)
        self.exports = exports
        self.results = results
        logger.debug(f"Lockstep round {self.round} done on {len(results)} devices")
        return results

    def run(self, rounds: int) -> Dict[DeviceId, Any]:
        """
        Execute several rounds.

        Args:
            rounds: Number of rounds

        Returns:
            Results of the last round
        """
        for _ in range(rounds):
            self.step()
        return self.results
