"""
Neighbouring fields: per-neighbour values observed by one device.
"""

from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterator, List, Mapping, Tuple

DeviceId = int


@dataclass(frozen=True)
class NbrField:
    """
    Mapping from aligned neighbour ids (self included) to values.

    Lookups of ids outside the domain yield `default`. The self entry is
    always present.
    """
    self_id: DeviceId
    values: Mapping[DeviceId, Any]
    default: Any = None

    def __post_init__(self):
        if self.self_id not in self.values:
            values = dict(self.values)
            values[self.self_id] = self.default
            object.__setattr__(self, "values", values)

    def get(self, device: DeviceId) -> Any:
        return self.values.get(device, self.default)

    def __getitem__(self, device: DeviceId) -> Any:
        return self.get(device)

    def __contains__(self, device: DeviceId) -> bool:
        return device in self.values

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self) -> Iterator[DeviceId]:
        return iter(self.ids())

    @property
    def self_value(self) -> Any:
        return self.values[self.self_id]

    def ids(self) -> List[DeviceId]:
        """Domain of the field in ascending id order."""
        return sorted(self.values)

    def items(self) -> List[Tuple[DeviceId, Any]]:
        return [(device, self.values[device]) for device in self.ids()]

    def neighbours(self) -> List[Tuple[DeviceId, Any]]:
        """Entries other than self, in ascending id order."""
        return [(device, value) for device, value in self.items() if device != self.self_id]

    def map(self, f: Callable[[Any], Any]) -> "NbrField":
        return NbrField(self.self_id, {d: f(v) for d, v in self.values.items()}, f(self.default))

    def with_self(self, value: Any) -> "NbrField":
        values = dict(self.values)
        values[self.self_id] = value
        return NbrField(self.self_id, values, self.default)

    def to_dict(self) -> Dict[DeviceId, Any]:
        return dict(self.items())


def is_field(value: Any) -> bool:
    return isinstance(value, NbrField)
