import json

import pandas as pd

from app import main

SMALL = ["--rows", "1", "--cols", "1", "--forklifts", "2", "--set", "slots_x=4", "--set", "loading_slots=4",
         "--set", "loading_empty=2"]


def test_run_writes_one_row_per_second(tmp_path, capsys):
    out = tmp_path / "metrics.csv"
    code = main(["--seed", "3", "--duration", "20", "--out", str(out)] + SMALL)
    assert code == 0
    frame = pd.read_csv(out)
    assert list(frame["time"]) == list(range(20))
    printed = capsys.readouterr().out.strip()
    assert printed.startswith("scenario=warehouse seed=3 rows=1 logs_created=")
    assert "over_budget=" in printed and "warnings=" in printed


def test_same_seed_same_bytes(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["--seed", "42", "--duration", "15", "--out", str(first)] + SMALL) == 0
    assert main(["--seed", "42", "--duration", "15", "--out", str(second)] + SMALL) == 0
    assert first.read_bytes() == second.read_bytes()


def test_negative_duration_is_a_usage_error(tmp_path, capsys):
    out = tmp_path / "metrics.csv"
    assert main(["--duration", "-5", "--out", str(out)]) == 2
    err = capsys.readouterr().err
    assert "usage:" in err and "duration" in err
    assert not out.exists()


def test_unknown_set_key(tmp_path):
    assert main(["--set", "colour=red", "--out", str(tmp_path / "m.csv")]) == 2


def test_unknown_flag_exits_nonzero():
    assert main(["--bogus"]) == 2


def test_manifest_and_state_dump(tmp_path):
    manifest = tmp_path / "run.cfg"
    manifest.write_text("# collision run\nscenario = collision\nduration = 6\n")
    dump = tmp_path / "state.jsonl"
    out = tmp_path / "metrics.csv"
    ledger = tmp_path / "ledger.json"
    assert main(["--config", str(manifest), "--dump-state", str(dump), "--ledger", str(ledger), "--out", str(out)]) == 0
    lines = [json.loads(line) for line in dump.read_text().splitlines()]
    assert len(lines) == 12
    assert {line["node"] for line in lines} == {1, 2}
    assert len(pd.read_csv(out)) == 6
    assert json.loads(ledger.read_text()) == {"logs": [], "receipts": []}


def test_missing_manifest_is_an_io_error(tmp_path):
    assert main(["--config", str(tmp_path / "absent.cfg"), "--out", str(tmp_path / "m.csv")]) == 1


def test_profile_applies_drop_rate(tmp_path):
    out = tmp_path / "metrics.csv"
    assert main(["--profile", "lossy", "--scenario", "gradient-demo", "--rows", "2", "--duration", "10",
                 "--out", str(out)]) == 0
    ratios = pd.read_csv(out)["delivery_ratio"].dropna()
    assert (ratios < 1.0).any()


def test_unknown_profile(tmp_path):
    assert main(["--profile", "nowhere", "--out", str(tmp_path / "m.csv")]) == 2


def test_ledger_write_failure_exits_nonzero(tmp_path, capsys):
    out = tmp_path / "metrics.csv"
    ledger = tmp_path / "missing" / "ledger.json"
    assert main(["--scenario", "collision", "--duration", "3", "--ledger", str(ledger), "--out", str(out)]) == 1
    assert "error:" in capsys.readouterr().err
    assert not ledger.exists()


def test_failed_run_leaves_no_state_dump(tmp_path):
    dump = tmp_path / "state.jsonl"
    out = tmp_path / "missing" / "metrics.csv"
    assert main(["--scenario", "collision", "--duration", "3", "--dump-state", str(dump), "--out", str(out)]) == 1
    assert list(tmp_path.iterdir()) == []


def test_infinite_duration_is_a_usage_error(tmp_path, capsys):
    out = tmp_path / "metrics.csv"
    assert main(["--duration", "inf", "--out", str(out)]) == 2
    assert main(["--set", "duration=.nan", "--out", str(out)]) == 2
    assert "duration" in capsys.readouterr().err
    assert not out.exists()
