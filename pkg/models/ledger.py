"""
In-memory ledger of warehouse logs and their receipts at sink groups.
Mirrors what the sinks would upload, so metrics can be derived after a run.
"""

import json
from dataclasses import asdict, dataclass
from typing import Any, Dict, Hashable, List, Optional, Tuple

import pandas as pd

from utils.files import atomic_write
from utils.logger import setup_logger

logger = setup_logger("ledger")

LogId = Tuple[int, int]


@dataclass(frozen=True)
class LogRecord:
    """
    One log of a relevant warehouse event.

    Attributes:
        origin: Device that created the log
        seq: Per-origin counter; (origin, seq) is globally unique
        event: "load", "unload" or "collision-warning"
        created_at: Simulated creation time in seconds
    """
    origin: int
    seq: int
    event: str
    created_at: float

    @property
    def log_id(self) -> LogId:
        return self.origin, self.seq


@dataclass(frozen=True)
class Receipt:
    log_id: LogId
    group: int
    sink: int
    time: float


class LogLedger:
    """
    Two tables: created logs and first receipts per (log, sink group).
    """

    def __init__(self):
        self.logs: Dict[LogId, LogRecord] = {}
        self.receipts: Dict[Tuple[LogId, int], Receipt] = {}
        self._seq: Dict[int, int] = {}

    def create(self, origin: int, event: str, created_at: float) -> LogRecord:
        """
        Create a log with the origin's next sequence number.

        Args:
            origin: Creating device
            event: Event name
            created_at: Simulated time

        Returns:
            The new LogRecord
        """
        seq = self._seq.get(origin, 0) + 1
        self._seq[origin] = seq
        record = LogRecord(origin, seq, event, created_at)
        self.logs[record.log_id] = record
        logger.debug(f"Log {record.log_id} ({event}) created at {created_at:.3f}")
        return record

    def record_receipt(self, log_id: Hashable, group: int, sink: int, time: float) -> bool:
        """
        Record that a sink of a group received a log.

        Args:
            log_id: (origin, seq)
            group: Sink group of the receiving device
            sink: Receiving device
            time: Simulated receipt time

        Returns:
            True if this is the group's first receipt of the log
        """
        log_id = tuple(log_id)
        if log_id not in self.logs:
            logger.warning(f"Receipt for unknown log {log_id} at sink {sink}")
            return False
        if (log_id, group) in self.receipts:
            return False
        self.receipts[(log_id, group)] = Receipt(log_id, group, sink, time)
        return True

    def groups_of(self, log_id: LogId) -> List[int]:
        return sorted(group for (logged, group) in self.receipts if logged == log_id)

    def collected(self) -> int:
        """Number of logs received by at least one group."""
        return len({log_id for log_id, _ in self.receipts})

    def counts_until(self, time: float) -> Tuple[int, int, int]:
        """
        Cumulative counts at a point in time.

        Args:
            time: Exclusive upper bound in simulated seconds

        Returns:
            (logs created, logs received at least once, logs received by both groups)
        """
        created = {log_id for log_id, record in self.logs.items() if record.created_at < time}
        groups: Dict[LogId, set] = {}
        for (log_id, group), receipt in self.receipts.items():
            if receipt.time < time and log_id in created:
                groups.setdefault(log_id, set()).add(group)
        once = len(groups)
        twice = sum(1 for found in groups.values() if len(found) >= 2)
        return len(created), once, twice

    def delays(self) -> List[float]:
        """Collection delay of every receipt, in recording order."""
        return [receipt.time - self.logs[receipt.log_id].created_at for receipt in self.receipts.values()]

    def delays_between(self, start: float, end: float) -> List[float]:
        """Collection delays of the receipts recorded in [start, end)."""
        return [
            receipt.time - self.logs[receipt.log_id].created_at
            for receipt in self.receipts.values()
            if start <= receipt.time < end
        ]

    def to_frame(self) -> pd.DataFrame:
        """
        Join logs with their receipts.

        Returns:
            DataFrame with one row per log and a receipt time column per group
        """
        rows: List[Dict[str, Any]] = []
        for log_id, record in sorted(self.logs.items()):
            row = asdict(record)
            for group in (1, 2):
                receipt: Optional[Receipt] = self.receipts.get((log_id, group))
                row[f"group{group}_time"] = receipt.time if receipt else None
            rows.append(row)
        return pd.DataFrame(rows, columns=["origin", "seq", "event", "created_at", "group1_time", "group2_time"])

    def save_to_file(self, file_path: str) -> None:
        """
        Save the ledger to a JSON file, atomically.

        Args:
            file_path: Path to save the ledger to

        Raises:
            OSError: if the file cannot be written
        """
        with atomic_write(file_path, prefix=".ledger-") as f:
            json.dump({
                'logs': [asdict(r) for r in self.logs.values()],
                'receipts': [asdict(r) for r in self.receipts.values()],
            }, f, indent=2)
        logger.info(f"Ledger saved to {file_path}")
