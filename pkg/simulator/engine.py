"""
Discrete-event simulator.
Schedules the rounds of every device, delivers exports by proximity, moves
forklifts and collects per-second metrics. Everything random is drawn from
generators seeded by the configuration, so a run is reproducible.
"""

import json
import math
from typing import IO, Any, Callable, Dict, Optional

import numpy as np

from calculus.context import RoundContext, RuntimeOptions, SensorSnapshot, execute_round
from calculus.export import Export, message_size
from models.metrics import MetricsCollector, MetricsSeries
from simulator.events import Event, EventKind, EventQueue
from simulator.network import Network, deliver
from simulator.node import NodeState, mobility_step
from simulator.scenario import BaseScenario
from utils.config import ConfigError, SimConfig
from utils.logger import setup_logger

logger = setup_logger("simulator.engine")


class Simulator:
    """
    Event loop over one scenario.
    """

    def __init__(self, config: SimConfig, scenario: BaseScenario, program: Optional[Callable[..., Any]] = None,
                 dump_state: Optional[IO[str]] = None):
        """
        Initialize the simulator.

        Args:
            config: Simulation configuration; validated here
            scenario: Scenario providing nodes, inputs and reactions
            program: Aggregate program overriding the scenario's own
            dump_state: Open text stream receiving one JSON line per round

        Raises:
            ConfigError: if the configuration is invalid
        """
        self.config = config.validate()
        self.scenario = scenario
        self.program = program or scenario.program
        self.dump_state = dump_state
        self.options = RuntimeOptions(staleness=config.staleness, quarantine=config.quarantine)

        placement_rng, phase_rng, drop_rng = np.random.default_rng(config.seed).spawn(3)
        self.queue = EventQueue()
        self.nodes: Dict[int, NodeState] = {}
        for node in sorted(scenario.build_nodes(placement_rng), key=lambda n: n.id):
            if node.id in self.nodes:
                raise ConfigError(f"Scenario {scenario.name} built two nodes with id {node.id}")
            self.nodes[node.id] = node
        self._phase_rng = phase_rng
        self.network = Network(self.nodes, config.comm_radius)
        self._drop_rng = drop_rng
        self.metrics = MetricsCollector(config.message_budget)
        self.time = 0.0
        self._next_second = 0
        self._ticks = 0

        self._handlers: Dict[EventKind, Callable[[Event], None]] = {
            EventKind.MOBILITY: self._handle_mobility,
            EventKind.DELIVERY: self._handle_delivery,
            EventKind.ROUND: self._handle_round,
        }

    def _schedule_initial_events(self) -> None:
        duration = self.config.duration
        nodes = [self.nodes[i] for i in sorted(self.nodes)]
        for device, phase in self.scenario.phases(nodes, self._phase_rng).items():
            self.nodes[device].phase = phase
            if phase < duration:
                self.queue.push(Event(phase, EventKind.ROUND, device))
        if self.config.mobility_tick < duration:
            self.queue.push(Event(self.config.mobility_tick, EventKind.MOBILITY, 0))

    def run(self) -> MetricsSeries:
        """
        Run the event loop until the configured duration.

        Returns:
            MetricsSeries with one row per simulated second
        """
        logger.info(f"Starting {self.scenario.name} run: seed={self.config.seed}, "
                    f"nodes={len(self.nodes)}, duration={self.config.duration}s")
        self.scenario.attach(self.nodes)
        self._schedule_initial_events()

        while self.queue:
            event = self.queue.pop()
            if event.time >= self.config.duration:
                break
            self._close_seconds_until(event.time)
            self.time = event.time
            self._handlers[event.kind](event)

        self._close_seconds_until(self.config.duration, inclusive=True)
        series = self.metrics.series(self.scenario.ledger)
        logger.info(f"Finished {self.scenario.name} run: {series.summary()}")
        return series

    def _close_seconds_until(self, time: float, inclusive: bool = False) -> None:
        last = math.ceil(time) if inclusive else math.floor(time)
        while self._next_second < last:
            second = self._next_second
            self.scenario.on_second(second)
            self.metrics.close_second(second, self.scenario.ledger, self.scenario.warnings_active())
            self._next_second += 1

    def _handle_mobility(self, event: Event) -> None:
        tick = self.config.mobility_tick
        self.scenario.on_tick(event.time, tick)
        for device in sorted(self.nodes):
            node = self.nodes[device]
            if node.mobile:
                self.nodes[device] = mobility_step(node, tick, self.config.max_speed)
        for node in self.nodes.values():
            if node.carried_by is not None:
                node.position = self.nodes[node.carried_by].position
        self.network.refresh()

        self._ticks += 1
        upcoming = (self._ticks + 1) * tick
        if upcoming < self.config.duration:
            self.queue.push(Event(upcoming, EventKind.MOBILITY, 0))

    def _handle_delivery(self, event: Event) -> None:
        node = self.nodes[event.target]
        export: Export = event.payload
        held = node.inbox.get(event.sender)
        if held is None or held.round <= export.round:
            node.inbox[event.sender] = export

    def _handle_round(self, event: Event) -> None:
        node = self.nodes[event.target]
        node.round += 1
        time = event.time
        sensors = SensorSnapshot(
            position=node.position,
            velocity=node.velocity,
            nbr_distances=self.network.distance_field(node.id),
            app_inputs=self.scenario.app_inputs(node, time),
            time=time,
            dt=time - node.last_round_time if node.last_round_time is not None else 0.0,
        )
        ctx = RoundContext(node.id, node.round, node.last_export, node.inbox, sensors, self.options)
        node.inbox = dict(ctx.inbox)
        result, export = execute_round(ctx, self.program)
        node.last_export = export
        node.last_round_time = time

        size = message_size(export)
        self.metrics.record_message(size)
        recipients = deliver(export, node, self.nodes.values(), self.config.comm_radius, self.config.drop_rate,
                             self._drop_rng)
        self.metrics.record_delivery(len(sensors.nbr_distances) - 1, len(recipients))
        for recipient in recipients:
            self.queue.push(Event(time + self.config.latency, EventKind.DELIVERY, recipient, node.id, export))

        self.scenario.on_round(node, time, result)
        if self.dump_state is not None:
            self.dump_state.write(json.dumps({
                "time": round(time, 6),
                "node": node.id,
                "round": node.round,
                "size": size,
                "result": self.scenario.render(result),
            }, sort_keys=True) + "\n")
        logger.debug(f"Node {node.id} round {node.round} at {time:.3f}: {size} bytes to {len(recipients)} nodes")

        upcoming = node.phase + node.round * node.period
        if upcoming < self.config.duration:
            self.queue.push(Event(upcoming, EventKind.ROUND, node.id))


def create_scenario(config: SimConfig) -> BaseScenario:
    """
    Instantiate the scenario named by config.scenario.

    Raises:
        ConfigError: for an unknown scenario name
    """
    from simulator.demos import CollisionScenario, GradientDemoScenario, SpawnDemoScenario
    from warehouse.scenario import WarehouseScenario

    registry = {
        cls.name: cls
        for cls in (WarehouseScenario, GradientDemoScenario, SpawnDemoScenario, CollisionScenario)
    }
    if config.scenario not in registry:
        raise ConfigError(f"Unknown scenario '{config.scenario}' (choose from {', '.join(sorted(registry))})")
    return registry[config.scenario](config)


def run(config: SimConfig, program: Optional[Callable[..., Any]] = None, scenario: Optional[BaseScenario] = None,
        dump_state: Optional[IO[str]] = None) -> MetricsSeries:
    """
    Run a simulation.

    Args:
        config: Simulation configuration
        program: Aggregate program; defaults to the scenario's
        scenario: Scenario instance; defaults to the one named by config.scenario
        dump_state: Optional stream for the per-round JSON-lines dump

    Returns:
        MetricsSeries of the run

    Raises:
        ConfigError: if the configuration is invalid
    """
    config.validate()
    scenario = scenario or create_scenario(config)
    return Simulator(config, scenario, program, dump_state).run()
