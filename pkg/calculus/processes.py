"""
Aggregate processes: the `spawn` builtin.

A process is a keyed sub-computation that spreads from the devices that
start it through every device returning an internal status, stops at border
devices, and is shut down by a wave of terminated statuses. Each device keeps
its process records inside its own export in a single envelope entry, which
doubles as the advertisement read by neighbours.
"""

from dataclasses import dataclass, replace
from enum import IntEnum
from functools import lru_cache
from typing import Any, Callable, Dict, Hashable, Iterable, List, Optional, Tuple, Union

from calculus.codec import encode_value
from calculus.context import RoundContext
from calculus.trace import Tag, call_site, digest32
from utils.logger import setup_logger

logger = setup_logger("calculus.processes")

TOMBSTONE_FLAG = 0x80
OUTPUT_FLAG = 0x04


class ProcessKeyCollisionError(RuntimeError):
    """Raised when two distinct process keys share a trace digest."""


class Status(IntEnum):
    """Process status returned by a spawned function; bit 2 is the output flag."""
    TERMINATED = 0
    EXTERNAL = 1
    BORDER = 2
    INTERNAL = 3
    TERMINATED_OUTPUT = 4
    EXTERNAL_OUTPUT = 5
    BORDER_OUTPUT = 6
    INTERNAL_OUTPUT = 7

    @property
    def base(self) -> "Status":
        return Status(self & 0x03)

    @property
    def is_output(self) -> bool:
        return bool(self & OUTPUT_FLAG)

    def with_output(self, output: bool = True) -> "Status":
        return Status((self & 0x03) | (OUTPUT_FLAG if output else 0))

    @classmethod
    def coerce(cls, value: Union[bool, int, "Status"]) -> "Status":
        """
        Normalise a status, mapping booleans to internal_output / border_output.

        Args:
            value: Status, bool or status integer

        Returns:
            Status
        """
        if isinstance(value, bool):
            return cls.INTERNAL_OUTPUT if value else cls.BORDER_OUTPUT
        return cls(value)


@dataclass(frozen=True)
class ProcessRecord:
    """
    Per-device bookkeeping of one process key.

    `tombstone_age` is 0 while the key is alive, and counts rounds since
    the key was tombstoned otherwise.
    """
    key: Hashable
    status: Status = Status.EXTERNAL
    tombstone_age: int = 0

    @property
    def tombstoned(self) -> bool:
        return self.tombstone_age > 0

    @property
    def runs(self) -> bool:
        """Whether the process function is evaluated for this record."""
        return not self.tombstoned and self.status.base != Status.TERMINATED

    def wire_status(self) -> int:
        if self.tombstoned:
            return TOMBSTONE_FLAG | min(self.tombstone_age, 0x7F)
        return int(self.status)


def status_from_wire(byte: int) -> Status:
    """Neighbour view of an envelope status byte; tombstones read as terminated."""
    if byte & TOMBSTONE_FLAG:
        return Status.TERMINATED
    return Status(byte & 0x07)


def process_lifecycle_step(record: ProcessRecord, observed: Iterable[Status], quarantine: int) -> Optional[ProcessRecord]:
    """
    Advance a process record by one round before the process function runs.

    Args:
        record: Record from the previous round (status EXTERNAL for a key
            joining this round)
        observed: Statuses advertised for the key by aligned neighbours
        quarantine: Rounds a tombstone is kept

    Returns:
        The updated record, or None once a tombstone has expired
    """
    if record.tombstoned:
        if record.tombstone_age >= quarantine:
            return None
        return replace(record, tombstone_age=record.tombstone_age + 1)
    if record.status.base == Status.TERMINATED:
        return replace(record, status=Status.TERMINATED, tombstone_age=1)
    if any(Status(s).base == Status.TERMINATED for s in observed):
        return replace(record, status=Status.TERMINATED)
    return record


@lru_cache(maxsize=4096, typed=True)
def key_bytes(key: Hashable) -> bytes:
    """Canonical encoding of a process key; keys are ordered by it."""
    return encode_value(key)


@lru_cache(maxsize=4096, typed=True)
def process_digest(key: Hashable) -> int:
    return digest32(key_bytes(key))


def pack_envelope(records: List[Tuple[Hashable, int]]) -> Tuple[Any, ...]:
    """
    Envelope value: one status byte per key, then the keys in the same order.

    Args:
        records: (key, wire status) pairs

    Returns:
        () when empty, else (status bytes, key, key, ...)
    """
    if not records:
        return ()
    return (bytes(status for _, status in records),) + tuple(key for key, _ in records)


def unpack_envelope(value: Any) -> List[Tuple[Hashable, int]]:
    """Inverse of pack_envelope; a missing envelope reads as empty."""
    if not value:
        return []
    statuses, keys = value[0], value[1:]
    return list(zip(keys, statuses))


def spawn(ctx: RoundContext, p: Callable[..., Tuple[Any, Union[Status, bool]]], keys: Iterable[Hashable],
          *args: Any) -> Dict[Hashable, Any]:
    """
    Run one aggregate process per active key.

    Active keys are the device's own keys, keys advertised as internal by
    aligned neighbours and keys still alive here from the previous round,
    excluding tombstoned ones.

    Args:
        ctx: Round context
        p: Process function called as p(ctx, key, *args) and returning
            (result, status); a bool status maps to internal/border output
        keys: Keys this device starts or keeps alive
        *args: Extra arguments passed to p

    Returns:
        Mapping from the keys whose status carried the output flag this
        round to their results

    Raises:
        ProcessKeyCollisionError: if two distinct keys share a digest
    """
    site = call_site(1)
    cursor = ctx.cursor
    envelope_key = cursor.claim(cursor.key_for(Tag(site)))

    own: Dict[Hashable, ProcessRecord] = {}
    for key, byte in unpack_envelope(ctx.previous(envelope_key)):
        if byte & TOMBSTONE_FLAG:
            own[key] = ProcessRecord(key, Status.TERMINATED, byte & 0x7F)
        else:
            own[key] = ProcessRecord(key, Status(byte))

    observed: Dict[Hashable, List[Status]] = {}
    invited = set()
    for _, advertised in sorted(ctx.neighbour_values(envelope_key).items()):
        for key, byte in unpack_envelope(advertised):
            status = status_from_wire(byte)
            observed.setdefault(key, []).append(status)
            if status.base == Status.INTERNAL:
                invited.add(key)

    candidates = set(own) | invited | set(keys)
    ordered = sorted(candidates, key=key_bytes)

    digests: Dict[int, Hashable] = {}
    envelope: List[Tuple[Hashable, int]] = []
    outputs: Dict[Hashable, Any] = {}

    for key in ordered:
        digest = process_digest(key)
        clash = digests.setdefault(digest, key)
        if clash != key:
            raise ProcessKeyCollisionError(f"Process keys {clash!r} and {key!r} share digest {digest:08x}")

        record = own.get(key, ProcessRecord(key))
        record = process_lifecycle_step(record, observed.get(key, ()), ctx.options.quarantine)
        if record is None:
            logger.debug(f"Device {ctx.device}: process {key!r} left quarantine")
            continue
        if not record.runs:
            envelope.append((key, record.wire_status()))
            continue

        with cursor.frame(Tag(site, process=digest)):
            with cursor.capture() as written:
                result, status = p(ctx, key, *args)
        status = Status.coerce(status)

        if status.is_output:
            outputs[key] = result
        if status.base == Status.EXTERNAL:
            continue
        cursor.commit(written)
        envelope.append((key, int(status)))
        if status.base == Status.TERMINATED:
            logger.debug(f"Device {ctx.device}: process {key!r} terminated at round {ctx.round}")

    cursor.write(envelope_key, encode_value(pack_envelope(envelope)))
    return outputs
