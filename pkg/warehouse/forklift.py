"""
Forklift task execution.

A forklift alternates between idling and running one task. An insert
fetches an empty pallet from the loading zone, fills it, asks the network
for an empty space and stores the pallet there. A retrieval asks the
network for a pallet holding the good, picks it up and unloads it in the
loading zone. Queries that find nothing within the search timeout are
abandoned.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Dict, FrozenSet, Optional, Set, Tuple

from simulator.node import Point
from utils.logger import setup_logger
from warehouse.goods import EMPTY_SPACE
from warehouse.routing import QueryKey, RouteHint
from warehouse.tasks import Task, TaskGenerator, TaskKind

if TYPE_CHECKING:
    from warehouse.scenario import WarehouseScenario

logger = setup_logger("warehouse.forklift")

PICK_SECONDS = 2.0


class Phase(str, Enum):
    IDLE = "idle"
    TO_EMPTY = "to-empty"
    LOADING = "loading"
    SEARCH = "search"
    TO_PALLET = "to-pallet"
    PICKING = "picking"
    TO_SLOT = "to-slot"
    WAIT_LOADING = "wait-loading"
    TO_LOADING = "to-loading"


DRIVING = {Phase.TO_EMPTY, Phase.TO_PALLET, Phase.TO_SLOT, Phase.TO_LOADING}


@dataclass
class ForkliftState:
    """
    Task-level state of one forklift.

    Attributes:
        id: Device id
        sink_group: Log sink group, by id parity
        at: Lane point the forklift is at or driving to
        task: Current task, None while idle
        phase: Step of the current task
        carried: Pallet on the forks
        warning: Collision warning of the latest round
        target_pallet: Pallet reserved for the task
        target_slot: Slot reserved for the task
        query: Active routing query
        cancelled: Queries this forklift has cancelled
        hints: Latest routing hint per query
    """
    id: int
    sink_group: int
    at: Point
    task: Optional[Task] = None
    phase: Phase = Phase.IDLE
    carried: Optional[int] = None
    warning: bool = False
    target_pallet: Optional[int] = None
    target_slot: Optional[int] = None
    query: Optional[QueryKey] = None
    cancelled: Set[QueryKey] = field(default_factory=set)
    hints: Dict[QueryKey, RouteHint] = field(default_factory=dict)
    seq: int = 0
    busy_until: float = 0.0
    search_started: float = 0.0
    completed: int = 0
    abandoned: int = 0

    @property
    def task_kind(self) -> TaskKind:
        return self.task.kind if self.task else TaskKind.IDLE

    def queries(self) -> Tuple[QueryKey, ...]:
        return (self.query,) if self.query is not None else ()

    def cancelled_keys(self) -> FrozenSet[QueryKey]:
        return frozenset(self.cancelled)


class ForkliftController:
    """
    Drives one forklift through its tasks, one mobility tick at a time.
    """

    def __init__(self, state: ForkliftState, tasks: TaskGenerator, world: "WarehouseScenario"):
        """
        Initialize the controller.

        Args:
            state: Forklift state
            tasks: Task source of this forklift
            world: Scenario owning pallets, slots and nodes
        """
        self.state = state
        self.tasks = tasks
        self.world = world
        self.search_timeout = world.config.search_timeout
        state.busy_until = tasks.idle_time()

    def observe(self, time: float, warning: bool, hints: Dict[QueryKey, RouteHint]) -> None:
        """
        Take in the results of the forklift's round.

        Args:
            time: Round time
            warning: Collision warning computed this round
            hints: Routing hints for this forklift's queries
        """
        state = self.state
        if warning and not state.warning:
            logger.info(f"Forklift {state.id}: collision warning at {time:.2f}s")
            self.world.create_log(state.id, "collision-warning", time)
        state.warning = warning
        state.hints.update(hints)

    def tick(self, time: float) -> None:
        state = self.state
        phase = state.phase
        if phase == Phase.IDLE:
            if time >= state.busy_until:
                self._start(time)
        elif phase in DRIVING:
            if not self.world.nodes[state.id].waypoints:
                self._arrive(time)
        elif phase in (Phase.LOADING, Phase.PICKING):
            if time >= state.busy_until:
                self._lift(time)
        elif phase == Phase.SEARCH:
            self._search(time)
        elif phase == Phase.WAIT_LOADING:
            self._to_loading_zone(time)

    def _start(self, time: float) -> None:
        state = self.state
        state.task = self.tasks.next_task()
        logger.info(f"Forklift {state.id}: starting {state.task} at {time:.2f}s")
        if state.task.kind == TaskKind.RETRIEVE:
            self._ask(time, state.task.good.kind)
            return
        pallet = self.world.empty_pallet_near(state.at)
        if pallet is None:
            logger.info(f"Forklift {state.id}: no empty pallet in the loading zone, dropping {state.task}")
            self._finish(time, completed=False)
            return
        self.world.claim_pallet(pallet, state.id)
        state.target_pallet = pallet
        self._drive(self.world.slot_of(pallet).access, Phase.TO_EMPTY)

    def _ask(self, time: float, target: int) -> None:
        state = self.state
        state.seq += 1
        state.query = (state.id, state.seq, target)
        state.search_started = time
        state.phase = Phase.SEARCH

    def _cancel(self) -> None:
        state = self.state
        if state.query is not None:
            state.cancelled.add(state.query)
            state.hints.pop(state.query, None)
            state.query = None

    def _search(self, time: float) -> None:
        state = self.state
        hint = state.hints.get(state.query)
        if hint is not None and hint.reachable:
            if state.task.kind == TaskKind.RETRIEVE and self.world.can_claim(hint.source, state.id, state.task.good.kind):
                self.world.claim_pallet(hint.source, state.id)
                state.target_pallet = hint.source
                self._drive(self.world.slot_of(hint.source).access, Phase.TO_PALLET)
                return
            if state.task.kind == TaskKind.INSERT:
                slot = self.world.free_slot_next_to(hint.source)
                if slot is not None:
                    self.world.reserve_slot(slot, state.id)
                    state.target_slot = slot
                    self._drive(self.world.layout.slots[slot].access, Phase.TO_SLOT)
                    return
        if time - state.search_started >= self.search_timeout:
            target = state.query[2]
            what = "empty space" if target == EMPTY_SPACE else f"good {target}"
            logger.info(f"Forklift {state.id}: {what} not found within {self.search_timeout:.0f}s, abandoning {state.task}")
            self._cancel()
            if state.carried is not None:
                self._to_loading_zone(time)
            else:
                self._finish(time, completed=False)

    def _drive(self, goal: Point, phase: Phase) -> None:
        self.world.drive(self.state.id, self.state.at, goal)
        self.state.at = goal
        self.state.phase = phase

    def _arrive(self, time: float) -> None:
        state = self.state
        if state.phase in (Phase.TO_EMPTY, Phase.TO_PALLET):
            self.world.pallets[state.target_pallet].picking = state.id
            state.busy_until = time + PICK_SECONDS
            state.phase = Phase.LOADING if state.phase == Phase.TO_EMPTY else Phase.PICKING
        elif state.phase == Phase.TO_SLOT:
            self.world.put_down(state.carried, state.target_slot)
            self._cancel()
            self._finish(time, completed=True)
        elif state.phase == Phase.TO_LOADING:
            pallet = state.carried
            self.world.put_down(pallet, state.target_slot)
            self.world.empty_pallet(pallet, time)
            self._finish(time, completed=state.task.kind == TaskKind.RETRIEVE)

    def _lift(self, time: float) -> None:
        state = self.state
        pallet = state.target_pallet
        self.world.pick_up(pallet, state.id)
        state.carried = pallet
        state.target_pallet = None
        if state.phase == Phase.LOADING:
            self.world.fill_pallet(pallet, state.task.good, time)
            self._ask(time, EMPTY_SPACE)
        else:
            self._cancel()
            self._to_loading_zone(time)

    def _to_loading_zone(self, time: float) -> None:
        state = self.state
        slot = self.world.free_loading_slot_near(state.at)
        if slot is None:
            state.phase = Phase.WAIT_LOADING
            return
        self.world.reserve_slot(slot, state.id)
        state.target_slot = slot
        self._drive(self.world.layout.slots[slot].access, Phase.TO_LOADING)

    def _finish(self, time: float, completed: bool) -> None:
        state = self.state
        if completed:
            state.completed += 1
            logger.info(f"Forklift {state.id}: completed {state.task} at {time:.2f}s")
        else:
            state.abandoned += 1
        if state.target_pallet is not None:
            self.world.release_pallet(state.target_pallet)
        state.task = None
        state.phase = Phase.IDLE
        state.carried = None
        state.target_pallet = None
        state.target_slot = None
        state.busy_until = time + self.tasks.idle_time()
