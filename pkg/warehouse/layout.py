"""
Warehouse floor plan: storage blocks, the loading zone and the lane graph
forklifts drive on.

Blocks of slots_x by slots_y pallet slots are laid out in rows x cols with
corridors between them. Horizontal lanes run below every block row and above
the last one, vertical lanes run left of every block column and right of the
last one. The loading zone is a single row of slots below the first lane.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import networkx as nx

from simulator.node import Point
from utils.config import SimConfig
from utils.logger import setup_logger

logger = setup_logger("warehouse.layout")


def _key(x: float, y: float) -> Point:
    return round(x, 6), round(y, 6)


@dataclass(frozen=True)
class Slot:
    """
    A place for one pallet.

    Attributes:
        id: Slot index
        position: Slot centre
        access: Lane point a forklift stops at to handle the slot
        block: (row, col) of the storage block, None in the loading zone
        cell: (i, j) within the block
    """
    id: int
    position: Point
    access: Point
    block: Optional[Tuple[int, int]] = None
    cell: Tuple[int, int] = (0, 0)

    @property
    def loading(self) -> bool:
        return self.block is None


class WarehouseLayout:
    """
    Geometry and lane graph of the warehouse.
    """

    def __init__(self, config: SimConfig):
        """
        Build the layout.

        Args:
            config: Simulation configuration (geometry fields)
        """
        self.config = config
        self.spacing = config.spacing
        self.corridor = config.corridor
        self.block_w = config.slots_x * config.spacing
        self.block_h = config.slots_y * config.spacing
        self.loading_h = config.spacing

        self.lane_y = [
            self.loading_h + self.corridor / 2 + r * (self.block_h + self.corridor) for r in range(config.rows + 1)
        ]
        self.lane_x = [self.corridor / 2 + k * (self.block_w + self.corridor) for k in range(config.cols + 1)]

        self.slots: List[Slot] = []
        self._by_cell: Dict[Tuple[int, int, int, int], int] = {}
        self._build_storage()
        self._build_loading()
        self.graph = self._build_lanes()
        logger.debug(f"Layout: {len(self.storage_slots)} storage slots, {len(self.loading_slots)} loading slots, "
                     f"{self.graph.number_of_nodes()} lane points")

    @property
    def width(self) -> float:
        return self.lane_x[-1] + self.corridor / 2

    @property
    def height(self) -> float:
        return self.lane_y[-1] + self.corridor / 2

    @property
    def storage_slots(self) -> List[Slot]:
        return [slot for slot in self.slots if not slot.loading]

    @property
    def loading_slots(self) -> List[Slot]:
        return [slot for slot in self.slots if slot.loading]

    def _build_storage(self) -> None:
        cfg = self.config
        for r in range(cfg.rows):
            y0 = self.loading_h + self.corridor + r * (self.block_h + self.corridor)
            for k in range(cfg.cols):
                x0 = self.corridor + k * (self.block_w + self.corridor)
                for j in range(cfg.slots_y):
                    lane = r if j < cfg.slots_y / 2 else r + 1
                    for i in range(cfg.slots_x):
                        x = x0 + (i + 0.5) * self.spacing
                        y = y0 + (j + 0.5) * self.spacing
                        slot = Slot(len(self.slots), _key(x, y), _key(x, self.lane_y[lane]), (r, k), (i, j))
                        self._by_cell[(r, k, i, j)] = slot.id
                        self.slots.append(slot)

    def _build_loading(self) -> None:
        for m in range(self.config.loading_slots):
            x = self.corridor + (m + 0.5) * self.spacing
            self.slots.append(Slot(len(self.slots), _key(x, self.loading_h / 2), _key(x, self.lane_y[0])))

    def _build_lanes(self) -> nx.Graph:
        graph = nx.Graph()
        rows: Dict[float, set] = {round(y, 6): {_key(x, y) for x in self.lane_x} for y in self.lane_y}
        for slot in self.slots:
            rows[slot.access[1]].add(slot.access)
        for points in rows.values():
            ordered = sorted(points)
            nx.add_path(graph, ordered)
        for x in self.lane_x:
            nx.add_path(graph, [_key(x, y) for y in self.lane_y])
        for a, b in graph.edges:
            graph.edges[a, b]["weight"] = abs(a[0] - b[0]) + abs(a[1] - b[1])
        return graph

    def neighbours(self, slot_id: int) -> List[int]:
        """
        Slots next to a storage slot within the same block.

        Args:
            slot_id: Slot index

        Returns:
            Ids of the up to four adjacent slots; empty for loading slots
        """
        slot = self.slots[slot_id]
        if slot.loading:
            return []
        r, k = slot.block
        i, j = slot.cell
        found = []
        for di, dj in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            other = self._by_cell.get((r, k, i + di, j + dj))
            if other is not None:
                found.append(other)
        return found

    def intersections(self) -> List[Point]:
        """Lane crossings ordered lane by lane from the loading zone upward."""
        return [_key(x, y) for y in self.lane_y for x in self.lane_x]

    def home(self, index: int) -> Point:
        crossings = self.intersections()
        return crossings[index % len(crossings)]

    def route(self, start: Point, goal: Point) -> List[Point]:
        """
        Shortest lane path between two lane points.

        Args:
            start: Current lane point
            goal: Destination lane point

        Returns:
            Waypoints after start, ending at goal; empty if already there
        """
        path = nx.shortest_path(self.graph, _key(*start), _key(*goal), weight="weight")
        return path[1:]
