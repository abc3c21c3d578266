import io
import json
import operator

import numpy as np
import pytest

from calculus.builtins import fold_hood, map_hood, nbr_uid
from calculus.export import Export
from simulator.engine import Simulator, create_scenario, run
from simulator.events import Event, EventKind, EventQueue
from simulator.network import deliver
from simulator.node import NodeState, Role, mobility_step
from simulator.scenario import BaseScenario
from utils.config import ConfigError, SimConfig


class PairScenario(BaseScenario):
    """Two static pallets 5 m apart counting their neighbours."""

    name = "pair"

    def __init__(self, config):
        super().__init__(config)
        self.latest = {}

    def build_nodes(self, rng):
        return [
            NodeState(1, Role.PALLET, (0.0, 0.0), period=self.config.period),
            NodeState(2, Role.PALLET, (5.0, 0.0), period=self.config.period),
        ]

    def phases(self, nodes, rng):
        return {1: 0.0, 2: 0.5}

    def program(self, ctx):
        return fold_hood(ctx, operator.add, map_hood(ctx, lambda _: 1, nbr_uid(ctx))) - 1

    def on_round(self, node, time, result):
        self.latest[node.id] = result


def test_event_queue_orders_by_time_then_kind_then_target():
    queue = EventQueue()
    queue.push(Event(1.0, EventKind.ROUND, 2))
    queue.push(Event(1.0, EventKind.ROUND, 1))
    queue.push(Event(1.0, EventKind.DELIVERY, 5, 3))
    queue.push(Event(1.0, EventKind.MOBILITY, 0))
    queue.push(Event(0.5, EventKind.ROUND, 9))
    order = [(e.time, e.kind, e.target) for e in (queue.pop() for _ in range(5))]
    assert order == [
        (0.5, EventKind.ROUND, 9),
        (1.0, EventKind.MOBILITY, 0),
        (1.0, EventKind.DELIVERY, 5),
        (1.0, EventKind.ROUND, 1),
        (1.0, EventKind.ROUND, 2),
    ]
    assert len(queue) == 0


def _line(*xs):
    return [NodeState(i + 1, Role.PALLET, (x, 0.0)) for i, x in enumerate(xs)]


def test_deliver_respects_radius():
    nodes = _line(0.0, 5.0, 10.0, 10.5)
    recipients = deliver(Export(1, 1), nodes[0], nodes, 10.0, 0.0, np.random.default_rng(1))
    assert recipients == [2, 3]


def test_deliver_drop_all():
    nodes = _line(0.0, 1.0, 2.0)
    assert deliver(Export(1, 1), nodes[0], nodes, 10.0, 1.0, np.random.default_rng(1)) == []


def test_deliver_without_drops_draws_nothing():
    nodes = _line(0.0, 1.0, 2.0)
    rng = np.random.default_rng(7)
    assert deliver(Export(1, 1), nodes[0], nodes, 10.0, 0.0, rng) == [2, 3]
    assert rng.random() == np.random.default_rng(7).random()


def test_simulator_sends_every_export_through_deliver(monkeypatch):
    import simulator.engine as engine

    sent = []

    def recording_deliver(export, sender, nodes, comm_radius, drop_rate, rng):
        recipients = deliver(export, sender, nodes, comm_radius, drop_rate, rng)
        sent.append((sender.id, export.round, tuple(recipients)))
        return recipients

    monkeypatch.setattr(engine, "deliver", recording_deliver)
    config = SimConfig(duration=3.0)
    series = Simulator(config, PairScenario(config)).run()
    assert sent == [(1, 1, (2,)), (2, 1, (1,)), (1, 2, (2,)), (2, 2, (1,)), (1, 3, (2,)), (2, 3, (1,))]
    assert series.frame["delivery_ratio"].dropna().eq(1.0).all()


def test_mobility_clamps_velocity():
    node = NodeState(1, Role.FORKLIFT, (0.0, 0.0), velocity=(10.0, 0.0))
    moved = mobility_step(node, 0.25, 2.0)
    assert moved.position == pytest.approx((0.5, 0.0))
    assert moved.velocity == pytest.approx((2.0, 0.0))


def test_mobility_follows_waypoints():
    node = NodeState(1, Role.FORKLIFT, (0.0, 0.0), waypoints=[(1.0, 0.0), (1.0, 2.0)], speed=2.0)
    moved = mobility_step(node, 1.0, 10.0)
    assert moved.position == pytest.approx((1.0, 1.0))
    assert moved.waypoints == [(1.0, 2.0)]
    arrived = mobility_step(moved, 1.0, 10.0)
    assert arrived.position == pytest.approx((1.0, 2.0))
    assert arrived.waypoints == []
    assert arrived.idle


def test_pallets_do_not_move():
    node = NodeState(1, Role.PALLET, (3.0, 4.0), velocity=(1.0, 0.0))
    assert mobility_step(node, 1.0, 10.0) is node


def test_node_rejects_non_positive_period():
    with pytest.raises(ValueError):
        NodeState(1, Role.PALLET, (0.0, 0.0), period=0.0)


def test_two_nodes_see_each_other():
    config = SimConfig(duration=5.0)
    scenario = PairScenario(config)
    series = Simulator(config, scenario).run()
    assert scenario.latest == {1: 1, 2: 1}
    assert len(series) == 5
    assert series.frame["delivery_ratio"].dropna().eq(1.0).all()


def test_total_drop_starves_neighbours():
    config = SimConfig(duration=5.0, drop_rate=1.0)
    scenario = PairScenario(config)
    series = Simulator(config, scenario).run()
    assert scenario.latest == {1: 0, 2: 0}
    assert series.frame["delivery_ratio"].dropna().eq(0.0).all()


def test_zero_duration_gives_empty_series():
    series = run(SimConfig(duration=0.0), scenario=PairScenario(SimConfig(duration=0.0)))
    assert len(series) == 0
    assert list(series.frame.columns)[0] == "time"


def test_partial_last_second_is_closed():
    config = SimConfig(duration=2.5)
    assert list(Simulator(config, PairScenario(config)).run().frame["time"]) == [0, 1, 2]


def test_message_budget_counts_oversize_exports():
    config = SimConfig(duration=3.0, message_budget=1)
    series = Simulator(config, PairScenario(config)).run()
    summary = series.summary()
    assert summary["messages"] == 6
    assert summary["over_budget"] == 6
    assert summary["within_budget_pct"] == 0.0


def test_invalid_config_is_rejected():
    with pytest.raises(ConfigError):
        Simulator(SimConfig(period=0.0), PairScenario(SimConfig()))


def test_duplicate_ids_are_rejected():
    class Twins(PairScenario):
        def build_nodes(self, rng):
            return [NodeState(1, Role.PALLET, (0.0, 0.0)), NodeState(1, Role.PALLET, (1.0, 0.0))]

    with pytest.raises(ConfigError):
        Simulator(SimConfig(duration=1.0), Twins(SimConfig()))


def test_unknown_scenario():
    with pytest.raises(ConfigError):
        create_scenario(SimConfig(scenario="nowhere"))


def test_state_dump_has_one_line_per_round():
    config = SimConfig(duration=3.0)
    dump = io.StringIO()
    Simulator(config, PairScenario(config), dump_state=dump).run()
    lines = [json.loads(line) for line in dump.getvalue().splitlines()]
    assert len(lines) == 6
    assert lines[0] == {"node": 1, "result": 0, "round": 1, "size": lines[0]["size"], "time": 0.0}


def test_gradient_demo_matches_bfs():
    config = SimConfig(scenario="gradient-demo", rows=2, slots_x=8, duration=31.0, seed=3)
    scenario = create_scenario(config)
    run(config, scenario=scenario)
    assert scenario.state["agreement"] == 1.0


def test_spawn_demo_terminates():
    config = SimConfig(scenario="spawn-demo", cols=1, slots_x=4, duration=30.0)
    scenario = create_scenario(config)
    run(config, scenario=scenario)
    assert max(scenario.participants.values()) == 5
    assert max(scenario.participants) <= scenario.lifetime + 8


def test_runs_are_deterministic():
    config = SimConfig(scenario="gradient-demo", rows=2, slots_x=6, duration=15.0, drop_rate=0.3, seed=11)
    first = run(config).to_csv_text()
    second = run(config).to_csv_text()
    assert first == second
    assert first.splitlines()[0] == (
        "time,msg_size_avg,msg_size_max,delivery_ratio,logs_created,logs_recv_once_pct,"
        "logs_recv_twice_pct,avg_collect_delay_s,warnings_active"
    )
