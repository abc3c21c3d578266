"""
Small demonstration scenarios: a gradient over a random deployment, a
process living on a line of pallets, and two forklifts driving at each
other.
"""

import operator
from typing import Any, Dict, List, Mapping, Tuple

import networkx as nx
import numpy as np

from blocks.collection import sp_collection
from blocks.gradient import HOPS_INF, NO_REGION, abf_hops
from blocks.spreading import broadcast
from calculus.context import RoundContext
from calculus.processes import Status, spawn
from models.ledger import LogLedger
from simulator.node import NodeState, Role
from simulator.scenario import BaseScenario
from utils.config import SimConfig
from warehouse.logs import LogBuffer, sink_group_of
from warehouse.program import NodeOutput, ServiceSettings, warehouse_program


class GradientDemoScenario(BaseScenario):
    """
    Static random deployment with one sink. Every node computes its hop
    distance, the sink's id spread by broadcast, and the sink counts the
    nodes by collection. Hop counts are checked against BFS every 10 s.
    """

    name = "gradient-demo"

    def __init__(self, config: SimConfig):
        super().__init__(config)
        self.sink = 1
        self.latest: Dict[int, Tuple[int, int, int]] = {}

    def build_nodes(self, rng: np.random.Generator) -> List[NodeState]:
        count = self.config.rows * self.config.slots_x
        side = 0.6 * self.config.comm_radius * np.sqrt(count)
        points = rng.uniform(0.0, side, size=(count, 2))
        return [
            NodeState(i + 1, Role.SINK_1 if i == 0 else Role.PALLET, (float(x), float(y)), period=self.config.period)
            for i, (x, y) in enumerate(points)
        ]

    def program(self, ctx: RoundContext) -> Tuple[int, int, int]:
        is_sink = ctx.device == self.sink
        hops = abf_hops(ctx, is_sink)
        sink = broadcast(ctx, hops, ctx.device if is_sink else NO_REGION)
        count = sp_collection(ctx, hops, 1, 0, operator.add)
        return hops, sink, count

    def on_round(self, node: NodeState, time: float, result: Tuple[int, int, int]) -> None:
        self.latest[node.id] = result

    def oracle(self) -> Dict[int, int]:
        """BFS hop distances from the sink over the current unit-disk graph."""
        graph = nx.Graph()
        graph.add_nodes_from(self.nodes)
        ids = sorted(self.nodes)
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                if np.hypot(*np.subtract(self.nodes[a].position, self.nodes[b].position)) <= self.config.comm_radius:
                    graph.add_edge(a, b)
        reachable = nx.single_source_shortest_path_length(graph, self.sink)
        return {device: reachable.get(device, HOPS_INF) for device in ids}

    def on_second(self, second: int) -> None:
        if second % 10 or not self.latest:
            return
        expected = self.oracle()
        agree = sum(1 for device, (hops, _, _) in self.latest.items() if expected.get(device) == hops)
        count = self.latest.get(self.sink, (0, 0, 0))[2]
        self.state["agreement"] = agree / len(expected)
        self.logger.info(f"t={second}s: {agree}/{len(expected)} hop counts match BFS, sink counts {count} nodes")


class SpawnDemoScenario(BaseScenario):
    """
    A forklift at the end of a line of pallets runs a process for a fixed
    number of rounds, then terminates it.
    """

    name = "spawn-demo"
    KEY = ("demo", 1)

    def __init__(self, config: SimConfig):
        super().__init__(config)
        self.lifetime = max(1, int(config.duration / config.period / 3))
        self.participants: Dict[int, int] = {}

    def build_nodes(self, rng: np.random.Generator) -> List[NodeState]:
        step = 0.8 * self.config.comm_radius
        count = self.config.slots_x * self.config.cols
        nodes = [NodeState(1, Role.FORKLIFT, (0.0, 0.0), period=self.config.period)]
        nodes += [NodeState(i + 2, Role.PALLET, ((i + 1) * step, 0.0), period=self.config.period) for i in range(count)]
        return nodes

    def _process(self, ctx: RoundContext, key: Any) -> Tuple[int, Status]:
        origin = ctx.device == 1
        hops = abf_hops(ctx, origin)
        if origin and ctx.round > self.lifetime:
            return hops, Status.TERMINATED
        return hops, Status.INTERNAL_OUTPUT

    def program(self, ctx: RoundContext) -> Dict[Any, int]:
        keys = [self.KEY] if ctx.device == 1 and ctx.round <= self.lifetime + 1 else []
        return spawn(ctx, self._process, keys)

    def on_round(self, node: NodeState, time: float, result: Dict[Any, int]) -> None:
        if result:
            self.participants[node.round] = self.participants.get(node.round, 0) + 1

    def on_second(self, second: int) -> None:
        round_ = second + 1
        if round_ in self.participants:
            self.logger.info(f"Round {round_}: {self.participants[round_]} nodes ran the process")


class CollisionScenario(BaseScenario):
    """
    Two forklifts on one lane, 20 m apart, driving towards each other at
    1 m/s each; rounds are synchronous at whole seconds.
    """

    name = "collision"

    def __init__(self, config: SimConfig):
        super().__init__(config)
        self.settings = ServiceSettings.from_config(config)
        self.ledger = LogLedger()
        self.buffer = LogBuffer(config.log_ttl)
        self.warning: Dict[int, bool] = {1: False, 2: False}
        self.history: Dict[int, List[Tuple[float, bool]]] = {1: [], 2: []}

    def build_nodes(self, rng: np.random.Generator) -> List[NodeState]:
        return [
            NodeState(1, Role.FORKLIFT, (0.0, 0.0), velocity=(1.0, 0.0), period=self.config.period),
            NodeState(2, Role.FORKLIFT, (20.0, 0.0), velocity=(-1.0, 0.0), period=self.config.period),
        ]

    def phases(self, nodes: List[NodeState], rng: np.random.Generator) -> Dict[int, float]:
        return {node.id: 0.0 for node in nodes}

    def program(self, ctx: RoundContext) -> NodeOutput:
        return warehouse_program(ctx, self.settings)

    def app_inputs(self, node: NodeState, time: float) -> Mapping[str, Any]:
        return {
            "role": Role.FORKLIFT.value,
            "sink_group": sink_group_of(node.id),
            "logs": self.buffer.retained(node.id, node.round),
        }

    def on_round(self, node: NodeState, time: float, result: NodeOutput) -> None:
        for log_id in sorted(result.delivered):
            self.ledger.record_receipt(log_id, sink_group_of(node.id), node.id, time)
        if result.warning and not self.warning[node.id]:
            record = self.ledger.create(node.id, "collision-warning", time)
            self.buffer.add(node.id, record.log_id, node.round)
            self.logger.info(f"Forklift {node.id}: collision warning at {time:.2f}s")
        self.warning[node.id] = result.warning
        self.history[node.id].append((time, result.warning))

    def warnings_active(self) -> int:
        return sum(self.warning.values())
