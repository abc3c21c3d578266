"""
Exports: the trace-keyed values a device broadcasts after each round.
"""

import struct
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping

from calculus.codec import SerializationError, decode_value, skip_value
from calculus.field import DeviceId

HEADER = struct.Struct("<II")
ENTRY_KEY = struct.Struct("<I")

_MISSING = object()


@dataclass(frozen=True)
class Export:
    """
    One round's output of one device.

    Attributes:
        device: Sending device
        round: Round counter of the sender
        entries: Wire key to encoded value
    """
    device: DeviceId
    round: int
    entries: Mapping[int, bytes] = field(default_factory=dict)
    _decoded: Dict[int, Any] = field(default_factory=dict, init=False, repr=False, compare=False)

    def has(self, key: int) -> bool:
        return key in self.entries

    def value(self, key: int, default: Any = None) -> Any:
        """
        Decoded value stored at a wire key.

        Args:
            key: Wire key
            default: Returned when the key is absent

        Returns:
            Decoded value or default
        """
        cached = self._decoded.get(key, _MISSING)
        if cached is not _MISSING:
            return cached
        payload = self.entries.get(key)
        if payload is None:
            return default
        decoded = decode_value(payload)
        self._decoded[key] = decoded
        return decoded

    def encode(self) -> bytes:
        """
        Wire form: header (device, round) then entries in ascending key order.

        Returns:
            Encoded bytes
        """
        parts = [HEADER.pack(self.device, self.round)]
        for key in sorted(self.entries):
            parts.append(ENTRY_KEY.pack(key))
            parts.append(self.entries[key])
        return b"".join(parts)

    @property
    def size(self) -> int:
        return HEADER.size + sum(ENTRY_KEY.size + len(v) for v in self.entries.values())

    @classmethod
    def decode(cls, data: bytes) -> "Export":
        """
        Parse the wire form produced by `encode`.

        Args:
            data: Encoded export

        Returns:
            Export

        Raises:
            SerializationError: on malformed input
        """
        if len(data) < HEADER.size:
            raise SerializationError("Export shorter than its header")
        device, round_ = HEADER.unpack_from(data, 0)
        offset = HEADER.size
        entries: Dict[int, bytes] = {}
        while offset < len(data):
            if offset + ENTRY_KEY.size > len(data):
                raise SerializationError("Truncated entry key")
            key = ENTRY_KEY.unpack_from(data, offset)[0]
            offset += ENTRY_KEY.size
            end = skip_value(data, offset)
            if key in entries:
                raise SerializationError(f"Duplicate entry key {key:08x}")
            entries[key] = bytes(data[offset:end])
            offset = end
        return cls(device, round_, entries)


def message_size(export: Export) -> int:
    """
    Byte length of an export's wire encoding.

    Args:
        export: Export to measure

    Returns:
        Number of bytes
    """
    return export.size
