"""
Base scenario class for the simulator.
A scenario builds the nodes, supplies the aggregate program and the inputs
of every round, and reacts to round results and the passing of time.
"""

from typing import Any, Dict, List, Mapping, MutableMapping, Optional

import numpy as np

from calculus.context import RoundContext
from models.ledger import LogLedger
from simulator.node import NodeState
from utils.config import SimConfig
from utils.logger import setup_logger


class BaseScenario:
    """
    Base class for all simulation scenarios.
    """

    name = "base"

    def __init__(self, config: SimConfig):
        """
        Initialize the scenario.

        Args:
            config: Simulation configuration
        """
        self.config = config
        self.logger = setup_logger(f"scenario.{self.name}")
        self.nodes: MutableMapping[int, NodeState] = {}
        self.ledger: Optional[LogLedger] = None
        self.state: Dict[str, Any] = {}

    def build_nodes(self, rng: np.random.Generator) -> List[NodeState]:
        """
        Create the devices of the scenario.
        This method should be overridden by subclasses.

        Args:
            rng: Seeded generator for placement

        Returns:
            Nodes with distinct ids
        """
        raise NotImplementedError

    def phases(self, nodes: List[NodeState], rng: np.random.Generator) -> Dict[int, float]:
        """
        First round offset of every node, drawn uniformly in [0, period).

        Args:
            nodes: Nodes in increasing id order
            rng: Seeded generator

        Returns:
            Mapping of device id to phase
        """
        draws = rng.random(len(nodes))
        return {node.id: float(draw) * node.period for node, draw in zip(nodes, draws)}

    def attach(self, nodes: MutableMapping[int, NodeState]) -> None:
        """Hand the live node table to the scenario before the run starts."""
        self.nodes = nodes

    def program(self, ctx: RoundContext) -> Any:
        """
        The aggregate program run by every node.
        This method should be overridden by subclasses.
        """
        raise NotImplementedError

    def app_inputs(self, node: NodeState, time: float) -> Mapping[str, Any]:
        return {}

    def on_round(self, node: NodeState, time: float, result: Any) -> None:
        """React to the result of a node's round."""

    def on_tick(self, time: float, dt: float) -> None:
        """Scenario logic run at every mobility tick, before nodes move."""

    def on_second(self, second: int) -> None:
        """Called when a simulated second has been fully processed."""

    def warnings_active(self) -> int:
        return 0

    def summary(self) -> Dict[str, Any]:
        """Scenario-specific totals reported after a run."""
        return {}

    def render(self, result: Any) -> Any:
        """JSON-friendly form of a round result for state dumps."""
        return _jsonable(result)


def _jsonable(value: Any) -> Any:
    if hasattr(value, "_asdict"):
        return _jsonable(value._asdict())
    if isinstance(value, (frozenset, set)):
        return sorted((_jsonable(v) for v in value), key=repr)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in sorted(value.items(), key=lambda item: repr(item[0]))}
    if isinstance(value, (np.integer, np.floating, np.bool_)):
        return value.item()
    if hasattr(value, "to_dict"):
        return _jsonable(value.to_dict())
    return value
