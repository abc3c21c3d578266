"""
Per-second metrics of a simulation run.
Collects message sizes, delivery counts and log statistics while the
simulator runs and exposes them as a pandas DataFrame.
"""

import math
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from models.ledger import LogLedger
from utils.files import atomic_write
from utils.logger import setup_logger

logger = setup_logger("metrics")

COLUMNS = [
    "time",
    "msg_size_avg",
    "msg_size_max",
    "delivery_ratio",
    "logs_created",
    "logs_recv_once_pct",
    "logs_recv_twice_pct",
    "avg_collect_delay_s",
    "warnings_active",
]


class MetricsSeries:
    """
    One row per simulated second, plus run totals.
    """

    def __init__(self, frame: pd.DataFrame, totals: Optional[Dict[str, Any]] = None):
        """
        Initialize the series.

        Args:
            frame: DataFrame with exactly the COLUMNS
            totals: Run-wide counters (messages, over_budget, logs, warnings)
        """
        self.frame = frame[COLUMNS]
        self.totals = dict(totals or {})

    def __len__(self) -> int:
        return len(self.frame)

    def to_csv_text(self) -> str:
        return self.frame.to_csv(index=False, float_format="%.6f", na_rep="", lineterminator="\n")

    def to_csv(self, path: str) -> None:
        """
        Write the series as CSV, atomically.

        Args:
            path: Output file path

        Raises:
            OSError: if the file cannot be written
        """
        with atomic_write(path, prefix=".metrics-") as out:
            out.write(self.to_csv_text())
        logger.info(f"Metrics written to {path} ({len(self)} rows)")

    def summary(self) -> Dict[str, Any]:
        """
        Run-wide summary.

        Returns:
            Dictionary with logs_created, logs_collected, max_msg, over_budget,
            within_budget_pct, warnings and the mean collection delay over
            every receipt
        """
        messages = self.totals.get("messages", 0)
        over = self.totals.get("over_budget", 0)
        sizes = self.frame["msg_size_max"].dropna()
        return {
            "logs_created": self.totals.get("logs_created", 0),
            "logs_collected": self.totals.get("logs_collected", 0),
            "logs_twice": self.totals.get("logs_twice", 0),
            "max_msg": int(sizes.max()) if len(sizes) else 0,
            "messages": messages,
            "over_budget": over,
            "within_budget_pct": 100.0 * (messages - over) / messages if messages else 100.0,
            "warnings": self.totals.get("warnings", 0),
            "mean_collect_delay_s": self.totals.get("mean_collect_delay_s"),
        }


class MetricsCollector:
    """
    Accumulates raw observations and closes them into rows second by second.
    """

    def __init__(self, budget: int):
        self.budget = budget
        self.rows: List[Dict[str, Any]] = []
        self.messages = 0
        self.over_budget = 0
        self._sizes: List[int] = []
        self._attempted = 0
        self._delivered = 0

    def record_message(self, size: int) -> bool:
        """
        Account one sent export.

        Returns:
            True if the message is over budget
        """
        self.messages += 1
        self._sizes.append(size)
        if size > self.budget:
            self.over_budget += 1
            logger.debug(f"Message of {size} bytes exceeds the {self.budget} byte budget")
            return True
        return False

    def record_delivery(self, attempted: int, delivered: int) -> None:
        self._attempted += attempted
        self._delivered += delivered

    def close_second(self, second: int, ledger: Optional[LogLedger], warnings_active: int) -> None:
        """
        Turn the observations of [second, second + 1) into a row.

        Args:
            second: Second index
            ledger: Log ledger of the scenario, if it creates logs
            warnings_active: Forklifts warning at the end of the second
        """
        row: Dict[str, Any] = {"time": second}
        if self._sizes:
            row["msg_size_avg"] = float(np.mean(self._sizes))
            row["msg_size_max"] = max(self._sizes)
        else:
            row["msg_size_avg"] = math.nan
            row["msg_size_max"] = None
        row["delivery_ratio"] = self._delivered / self._attempted if self._attempted else math.nan

        created, once, twice = ledger.counts_until(second + 1) if ledger else (0, 0, 0)
        row["logs_created"] = created
        row["logs_recv_once_pct"] = 100.0 * once / created if created else math.nan
        row["logs_recv_twice_pct"] = 100.0 * twice / created if created else math.nan
        delays = ledger.delays_between(second, second + 1) if ledger else []
        row["avg_collect_delay_s"] = float(np.mean(delays)) if delays else math.nan
        row["warnings_active"] = warnings_active
        self.rows.append(row)

        self._sizes = []
        self._attempted = 0
        self._delivered = 0

    def series(self, ledger: Optional[LogLedger]) -> MetricsSeries:
        frame = pd.DataFrame(self.rows, columns=COLUMNS)
        frame["msg_size_max"] = frame["msg_size_max"].astype("Int64")
        for column in ("time", "logs_created", "warnings_active"):
            frame[column] = frame[column].astype("int64")
        created, once, twice = (len(ledger.logs), ledger.collected(), _twice(ledger)) if ledger else (0, 0, 0)
        totals = {
            "messages": self.messages,
            "over_budget": self.over_budget,
            "logs_created": created,
            "logs_collected": once,
            "logs_twice": twice,
            "warnings": _warnings(ledger) if ledger else 0,
            "mean_collect_delay_s": _mean_delay(ledger),
        }
        return MetricsSeries(frame, totals)


def _twice(ledger: LogLedger) -> int:
    return sum(1 for log_id in ledger.logs if len(ledger.groups_of(log_id)) >= 2)


def _warnings(ledger: LogLedger) -> int:
    return sum(1 for record in ledger.logs.values() if record.event == "collision-warning")


def _mean_delay(ledger: Optional[LogLedger]) -> Optional[float]:
    delays = ledger.delays() if ledger else []
    return float(np.mean(delays)) if delays else None
