import json
import math

import pandas as pd
import pytest

from models.ledger import LogLedger
from models.metrics import COLUMNS, MetricsCollector


def _ledger():
    ledger = LogLedger()
    ledger.create(5, "load", 0.5)
    ledger.create(5, "unload", 1.2)
    ledger.create(8, "collision-warning", 1.7)
    return ledger


def test_log_ids_count_per_origin():
    ledger = _ledger()
    assert sorted(ledger.logs) == [(5, 1), (5, 2), (8, 1)]


def test_first_receipt_per_group_wins():
    ledger = _ledger()
    assert ledger.record_receipt((5, 1), 1, 1, 2.0)
    assert not ledger.record_receipt((5, 1), 1, 3, 2.5)
    assert ledger.record_receipt((5, 1), 2, 2, 3.0)
    assert ledger.groups_of((5, 1)) == [1, 2]
    assert ledger.receipts[((5, 1), 1)].sink == 1


def test_unknown_log_receipt_is_ignored():
    assert not _ledger().record_receipt((9, 9), 1, 1, 1.0)


def test_counts_until_is_cumulative():
    ledger = _ledger()
    ledger.record_receipt((5, 1), 1, 1, 1.5)
    ledger.record_receipt((5, 1), 2, 2, 2.5)
    assert ledger.counts_until(1.0) == (1, 0, 0)
    assert ledger.counts_until(2.0) == (3, 1, 0)
    assert ledger.counts_until(3.0) == (3, 1, 1)
    assert ledger.delays_between(1.0, 2.0) == [pytest.approx(1.0)]


def test_ledger_frame():
    ledger = _ledger()
    ledger.record_receipt((8, 1), 2, 2, 4.0)
    frame = ledger.to_frame()
    assert list(frame["event"]) == ["load", "unload", "collision-warning"]
    assert frame["group2_time"].iloc[2] == 4.0
    assert pd.isna(frame["group1_time"].iloc[2])


def test_empty_second_has_blank_cells():
    collector = MetricsCollector(budget=222)
    collector.close_second(0, None, 0)
    row = collector.rows[0]
    assert math.isnan(row["msg_size_avg"]) and row["msg_size_max"] is None
    text = collector.series(None).to_csv_text()
    assert text.splitlines() == [",".join(COLUMNS), "0,,,,0,,,,0"]


def test_second_rows_and_totals():
    ledger = _ledger()
    collector = MetricsCollector(budget=100)
    collector.record_message(80)
    assert collector.record_message(120)
    collector.record_delivery(4, 3)
    ledger.record_receipt((5, 1), 1, 1, 0.9)
    collector.close_second(0, ledger, 1)
    collector.record_message(60)
    collector.close_second(1, ledger, 0)

    series = collector.series(ledger)
    frame = series.frame
    assert list(frame.columns) == COLUMNS
    assert frame["msg_size_avg"].iloc[0] == 100.0
    assert frame["msg_size_max"].iloc[0] == 120
    assert frame["delivery_ratio"].iloc[0] == 0.75
    assert frame["logs_recv_once_pct"].iloc[0] == 100.0
    assert frame["avg_collect_delay_s"].iloc[0] == pytest.approx(0.4)
    assert frame["logs_created"].iloc[1] == 3
    assert pd.isna(frame["delivery_ratio"].iloc[1])

    summary = series.summary()
    assert summary["messages"] == 3 and summary["over_budget"] == 1
    assert summary["logs_created"] == 3 and summary["logs_collected"] == 1
    assert summary["warnings"] == 1
    assert summary["max_msg"] == 120


def test_csv_file_is_written_atomically(tmp_path):
    collector = MetricsCollector(budget=10)
    collector.record_message(5)
    collector.close_second(0, None, 0)
    path = tmp_path / "metrics.csv"
    path.write_text("old")
    collector.series(None).to_csv(str(path))
    assert path.read_text().startswith("time,")
    assert [p.name for p in tmp_path.iterdir()] == ["metrics.csv"]


def test_mean_collection_delay_weighs_every_receipt():
    ledger = _ledger()
    ledger.record_receipt((5, 1), 1, 1, 1.5)
    ledger.record_receipt((5, 2), 1, 1, 2.2)
    ledger.record_receipt((8, 1), 1, 1, 2.7)
    ledger.record_receipt((5, 1), 2, 2, 3.5)
    collector = MetricsCollector(budget=222)
    for second in range(4):
        collector.close_second(second, ledger, 0)
    series = collector.series(ledger)
    per_second = series.frame["avg_collect_delay_s"].dropna()
    assert per_second.mean() == pytest.approx(5.0 / 3.0)
    assert series.summary()["mean_collect_delay_s"] == pytest.approx(1.5)


def test_mean_collection_delay_without_receipts():
    assert MetricsCollector(budget=222).series(_ledger()).summary()["mean_collect_delay_s"] is None


def test_ledger_save_failure_raises(tmp_path):
    with pytest.raises(OSError):
        _ledger().save_to_file(str(tmp_path / "missing" / "ledger.json"))
    ledger_path = tmp_path / "ledger.json"
    _ledger().save_to_file(str(ledger_path))
    assert [p.name for p in tmp_path.iterdir()] == ["ledger.json"]
    assert len(json.loads(ledger_path.read_text())["logs"]) == 3
