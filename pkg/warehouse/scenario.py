"""
Warehouse scenario: pallets in storage blocks and a loading zone, forklifts
running random tasks, and the warehouse program on every device.
"""

import math
from typing import Any, Dict, List, Mapping, Optional

import numpy as np

from calculus.context import RoundContext
from models.ledger import LogLedger
from simulator.node import NodeState, Point, Role
from simulator.scenario import BaseScenario
from utils.config import SimConfig
from warehouse.forklift import ForkliftController, ForkliftState
from warehouse.goods import Good, GoodsCatalog, Led, PalletState
from warehouse.layout import Slot, WarehouseLayout
from warehouse.logs import LogBuffer, sink_group_of
from warehouse.program import NodeOutput, ServiceSettings, warehouse_program
from warehouse.tasks import TaskGenerator


class WarehouseScenario(BaseScenario):
    """
    The smart warehouse case study.
    """

    name = "warehouse"

    def __init__(self, config: SimConfig):
        """
        Initialize the scenario.

        Args:
            config: Simulation configuration
        """
        super().__init__(config)
        self.layout = WarehouseLayout(config)
        self.catalog = GoodsCatalog(config.kinds, config.zipf_exponent)
        self.settings = ServiceSettings.from_config(config)
        self.ledger = LogLedger()
        self.buffer = LogBuffer(config.log_ttl)
        self.pallets: Dict[int, PalletState] = {}
        self.occupant: Dict[int, int] = {}
        self.reserved_slots: Dict[int, int] = {}
        self.forklifts: Dict[int, ForkliftController] = {}

    def build_nodes(self, rng: np.random.Generator) -> List[NodeState]:
        """
        Place forklifts at lane crossings, pallets in a share of the storage
        slots and empty pallets in the first loading slots.

        Args:
            rng: Seeded generator for slot occupancy and contents

        Returns:
            Nodes; forklifts have ids 1..forklifts, pallets follow
        """
        cfg = self.config
        nodes: List[NodeState] = []
        for index in range(cfg.forklifts):
            device = index + 1
            home = self.layout.home(index)
            nodes.append(NodeState(device, Role.FORKLIFT, home, period=cfg.period, speed=cfg.max_speed))
            state = ForkliftState(device, sink_group_of(device), home)
            tasks = TaskGenerator(cfg.seed, device, self.catalog, cfg.idle_min, cfg.idle_max)
            self.forklifts[device] = ForkliftController(state, tasks, self)

        storage = self.layout.storage_slots
        filled = rng.random(len(storage)) < cfg.fill_ratio
        contents = self.catalog.draw_many(rng, len(storage))
        device = cfg.forklifts
        for slot, full, kind in zip(storage, filled, contents):
            if full:
                device += 1
                nodes.append(self._place_pallet(device, slot, Good(int(kind))))
        for slot in self.layout.loading_slots[:cfg.loading_empty]:
            device += 1
            nodes.append(self._place_pallet(device, slot, None))
        self.logger.info(f"Warehouse with {cfg.forklifts} forklifts and {len(self.pallets)} pallets "
                         f"({len(self.layout.slots) - len(self.occupant)} free slots)")
        return nodes

    def _place_pallet(self, device: int, slot: Slot, content: Optional[Good]) -> NodeState:
        self.pallets[device] = PalletState(device, content, slot.id)
        self.occupant[slot.id] = device
        return NodeState(device, Role.PALLET, slot.position, period=self.config.period)

    def program(self, ctx: RoundContext) -> NodeOutput:
        return warehouse_program(ctx, self.settings)

    def app_inputs(self, node: NodeState, time: float) -> Mapping[str, Any]:
        logs = self.buffer.retained(node.id, node.round)
        controller = self.forklifts.get(node.id)
        if controller is not None:
            state = controller.state
            return {
                "role": Role.FORKLIFT.value,
                "sink_group": state.sink_group,
                "logs": logs,
                "queries": state.queries(),
                "cancelled": state.cancelled_keys(),
            }
        pallet = self.pallets[node.id]
        return {
            "role": Role.PALLET.value,
            "logs": logs,
            "content": pallet.kind,
            "vacant_adjacent": self.free_slot_next_to(node.id) is not None,
            "claimed_by": pallet.claimed_by,
            "handling": pallet.handling,
            "picking": pallet.picking,
        }

    def on_round(self, node: NodeState, time: float, result: NodeOutput) -> None:
        controller = self.forklifts.get(node.id)
        if controller is None:
            self.pallets[node.id].led = result.led
            return
        for log_id in sorted(result.delivered):
            self.ledger.record_receipt(log_id, controller.state.sink_group, node.id, time)
        controller.observe(time, result.warning, result.hints)

    def on_tick(self, time: float, dt: float) -> None:
        for device in sorted(self.forklifts):
            self.forklifts[device].tick(time)

    def on_second(self, second: int) -> None:
        if second % 60 == 0:
            lit = sum(1 for p in self.pallets.values() if p.led != Led.OFF)
            self.logger.debug(f"t={second}s: {len(self.ledger.logs)} logs, {self.ledger.collected()} collected, "
                              f"{lit} leds lit")

    def warnings_active(self) -> int:
        return sum(1 for c in self.forklifts.values() if c.state.warning)

    def summary(self) -> Dict[str, int]:
        return {
            "tasks_completed": sum(c.state.completed for c in self.forklifts.values()),
            "tasks_abandoned": sum(c.state.abandoned for c in self.forklifts.values()),
            "pallets": len(self.pallets),
            "goods": sum(1 for p in self.pallets.values() if p.content is not None),
        }

    # World operations used by the forklift controllers

    def create_log(self, origin: int, event: str, time: float) -> None:
        record = self.ledger.create(origin, event, time)
        self.buffer.add(origin, record.log_id, self.nodes[origin].round)

    def slot_of(self, pallet: int) -> Slot:
        return self.layout.slots[self.pallets[pallet].slot]

    def drive(self, forklift: int, start: Point, goal: Point) -> None:
        node = self.nodes[forklift]
        node.waypoints = self.layout.route(start, goal)
        node.speed = self.config.max_speed

    def _free(self, slot: int) -> bool:
        return slot not in self.occupant and slot not in self.reserved_slots

    def free_slot_next_to(self, pallet: int) -> Optional[int]:
        """Lowest free storage slot adjacent to the pallet's slot, if any."""
        state = self.pallets.get(pallet)
        if state is None or state.slot is None:
            return None
        free = [slot for slot in self.layout.neighbours(state.slot) if self._free(slot)]
        return min(free) if free else None

    def free_loading_slot_near(self, point: Point) -> Optional[int]:
        free = [slot for slot in self.layout.loading_slots if self._free(slot.id)]
        if not free:
            return None
        return min(free, key=lambda slot: (math.dist(slot.access, point), slot.id)).id

    def empty_pallet_near(self, point: Point) -> Optional[int]:
        candidates = [
            pallet for pallet in self.pallets.values()
            if pallet.slot is not None and pallet.content is None and pallet.claimed_by is None
            and self.layout.slots[pallet.slot].loading
        ]
        if not candidates:
            return None
        return min(candidates, key=lambda p: (math.dist(self.layout.slots[p.slot].access, point), p.id)).id

    def can_claim(self, pallet: int, forklift: int, kind: int) -> bool:
        state = self.pallets.get(pallet)
        return (
            state is not None and state.slot is not None and not state.handling
            and state.claimed_by in (None, forklift) and state.kind == kind
        )

    def claim_pallet(self, pallet: int, forklift: int) -> None:
        self.pallets[pallet].claimed_by = forklift

    def release_pallet(self, pallet: int) -> None:
        state = self.pallets[pallet]
        state.claimed_by = None
        state.picking = None

    def reserve_slot(self, slot: int, forklift: int) -> None:
        self.reserved_slots[slot] = forklift

    def pick_up(self, pallet: int, forklift: int) -> None:
        state = self.pallets[pallet]
        self.occupant.pop(state.slot, None)
        state.slot = None
        state.handling = True
        state.picking = None
        node = self.nodes[pallet]
        node.carried_by = forklift
        node.position = self.nodes[forklift].position

    def put_down(self, pallet: int, slot: int) -> None:
        state = self.pallets[pallet]
        state.slot = slot
        state.handling = False
        state.claimed_by = None
        self.occupant[slot] = pallet
        self.reserved_slots.pop(slot, None)
        node = self.nodes[pallet]
        node.carried_by = None
        node.position = self.layout.slots[slot].position

    def fill_pallet(self, pallet: int, good: Good, time: float) -> None:
        self.pallets[pallet].content = good
        self.create_log(pallet, "load", time)

    def empty_pallet(self, pallet: int, time: float) -> None:
        self.pallets[pallet].content = None
        self.create_log(pallet, "unload", time)
