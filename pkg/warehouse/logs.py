"""
Log service: redundant collection of event logs towards two sink groups,
and the retention buffer deciding which logs a device still offers.
"""

from typing import Dict, FrozenSet, Hashable, Iterable, List, Optional, Tuple

from blocks.collection import redundant_collect
from blocks.gradient import abf_hops
from calculus.builtins import aggregate
from calculus.context import RoundContext
from models.ledger import LogId


@aggregate
def log_service(ctx: RoundContext, new_logs: Iterable[Hashable], sink_group: Optional[int]) -> FrozenSet[Hashable]:
    """
    Gossip retained logs towards the closest sink of each group.

    Args:
        ctx: Round context
        new_logs: Ids of the logs this device still offers
        sink_group: 1 or 2 for forklifts, None otherwise

    Returns:
        Log ids delivered here this round
    """
    first = abf_hops(ctx, sink_group == 1)
    second = abf_hops(ctx, sink_group == 2)
    return redundant_collect(ctx, first, second, new_logs, sink_group)


def sink_group_of(device: int) -> int:
    """Odd ids sink into group 1, even ids into group 2."""
    return 1 if device % 2 else 2


class LogBuffer:
    """
    Logs kept at their origin for a fixed number of rounds.
    """

    def __init__(self, ttl: int):
        self.ttl = ttl
        self._held: Dict[int, List[Tuple[LogId, int]]] = {}

    def add(self, device: int, log_id: LogId, round_: int) -> None:
        self._held.setdefault(device, []).append((log_id, round_))

    def retained(self, device: int, round_: int) -> Tuple[LogId, ...]:
        """
        Logs a device still offers in a round, dropping expired ones.

        Args:
            device: Device id
            round_: The device's upcoming round

        Returns:
            Log ids created at most ttl rounds ago
        """
        held = [(log_id, created) for log_id, created in self._held.get(device, []) if round_ - created <= self.ttl]
        if held:
            self._held[device] = held
        else:
            self._held.pop(device, None)
        return tuple(log_id for log_id, _ in held)
