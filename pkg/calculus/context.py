"""
Round context and the round executor.

A round collects the neighbours' latest exports, evaluates the program, and
produces the device's own export. `execute_round` is a pure function of the
context it is given.
"""

from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterator, Mapping, Optional, Tuple

from calculus.export import Export
from calculus.field import DeviceId, NbrField
from calculus.trace import Tag, Trace, call_site


@dataclass(frozen=True)
class RuntimeOptions:
    """Runtime knobs shared by all devices."""
    staleness: int = 3
    quarantine: int = 5


@dataclass(frozen=True)
class SensorSnapshot:
    """
    Local sensor readings available to the program during a round.

    Attributes:
        position: Coordinates in metres
        velocity: Velocity vector in m/s
        nbr_distances: Distance in metres to each neighbour in range (self is 0)
        app_inputs: Role-specific inputs such as button presses and queries
        time: Simulated time of the round in seconds
        dt: Seconds since the previous round of this device
    """
    position: Tuple[float, ...] = (0.0, 0.0)
    velocity: Tuple[float, ...] = (0.0, 0.0)
    nbr_distances: Optional[NbrField] = None
    app_inputs: Mapping[str, Any] = field(default_factory=dict)
    time: float = 0.0
    dt: float = 0.0


@dataclass
class RoundContext:
    """
    Everything one device sees during one round.

    The inbox is filtered on construction: the device's own id and exports
    older than `options.staleness` rounds are dropped.
    """
    device: DeviceId
    round: int
    prev_export: Optional[Export] = None
    inbox: Dict[DeviceId, Export] = field(default_factory=dict)
    sensors: SensorSnapshot = field(default_factory=SensorSnapshot)
    options: RuntimeOptions = field(default_factory=RuntimeOptions)
    cursor: Trace = field(default_factory=Trace, repr=False)

    def __post_init__(self):
        self.inbox = fresh_inbox(self.inbox, self.device, self.round, self.options.staleness)
        if self.sensors.nbr_distances is None:
            distances = NbrField(self.device, {self.device: 0.0}, float("inf"))
            self.sensors = SensorSnapshot(
                position=self.sensors.position,
                velocity=self.sensors.velocity,
                nbr_distances=distances,
                app_inputs=self.sensors.app_inputs,
                time=self.sensors.time,
                dt=self.sensors.dt,
            )

    @property
    def uid(self) -> DeviceId:
        return self.device

    @property
    def inputs(self) -> Mapping[str, Any]:
        return self.sensors.app_inputs

    def previous(self, key: int, default: Any = None) -> Any:
        """Own value stored at a wire key in the previous round."""
        if self.prev_export is None:
            return default
        return self.prev_export.value(key, default)

    def neighbour_values(self, key: int) -> Dict[DeviceId, Any]:
        """Values written at a wire key by aligned neighbours."""
        return {device: export.value(key) for device, export in self.inbox.items() if export.has(key)}

    @contextmanager
    def iteration(self, index: int) -> Iterator[None]:
        """
        Scope for the body of a loop.

        Builtins called repeatedly from the same source location must be
        wrapped so each iteration aligns with the same iteration elsewhere.

        Args:
            index: Iteration index, identical across devices for aligned iterations
        """
        with self.cursor.frame(Tag(call_site(2), index=index)):
            yield


def fresh_inbox(inbox: Mapping[DeviceId, Export], device: DeviceId, round_: int,
                staleness: int) -> Dict[DeviceId, Export]:
    """
    Drop the device's own export and exports too old to trust.

    Args:
        inbox: Latest export per sender
        device: Receiving device
        round_: Receiver's current round
        staleness: Maximum age in rounds

    Returns:
        Filtered inbox
    """
    return {
        sender: export for sender, export in inbox.items()
        if sender != device and round_ - export.round <= staleness
    }


def execute_round(ctx: RoundContext, program: Callable[..., Any], *args: Any, **kwargs: Any) -> Tuple[Any, Export]:
    """
    Run one round of an aggregate program.

    Args:
        ctx: Round context
        program: Aggregate function taking the context first
        *args: Extra positional arguments for the program
        **kwargs: Extra keyword arguments for the program

    Returns:
        Tuple of (program result, export holding exactly the entries written)
    """
    ctx.cursor = Trace()
    result = program(ctx, *args, **kwargs)
    export = Export(ctx.device, ctx.round, dict(sorted(ctx.cursor.entries.items())))
    return result, export
