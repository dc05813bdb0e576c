import logging

import db


def test_log_writes_ledger_and_logger(ledger, caplog):
    with caplog.at_level(logging.INFO, logger="cavity_qed"):
        db.log("info", "开始扫描 monogamy")
        db.log("WARNING", "CKW 不等式不成立")
    rows = db.fetch_logs()
    assert [r["level"] for r in rows] == ["WARNING", "INFO"]
    assert rows[1]["message"] == "开始扫描 monogamy"
    assert any("CKW" in r.message for r in caplog.records)


def test_fetch_logs_filters_by_level(ledger):
    db.log("INFO", "a")
    db.log("ERROR", "b")
    db.log("INFO", "c")
    assert [r["message"] for r in db.fetch_logs(level="info")] == ["c", "a"]
    assert len(db.fetch_logs(limit=1)) == 1


def test_record_run_roundtrips_argv(ledger):
    db.record_run("sweep", ["sweep", "--scenario", "swap"], 0, "out.csv", 12)
    db.record_run("compare", ["compare"], 3)
    runs = db.fetch_runs()
    assert runs[0]["command"] == "compare"
    assert runs[0]["exit_code"] == 3
    assert runs[0]["out_path"] is None
    assert runs[1]["argv"] == ["sweep", "--scenario", "swap"]
    assert runs[1]["rows"] == 12


def test_without_ledger_only_logging(tmp_path, caplog):
    db.close_db()
    with caplog.at_level(logging.INFO, logger="cavity_qed"):
        db.log("INFO", "无台账")
        db.record_run("sweep", [], 0)
    assert any(r.message == "无台账" for r in caplog.records)
    assert not list(tmp_path.iterdir())


def test_init_db_creates_parent_dirs(tmp_path):
    path = tmp_path / "nested" / "dir" / "runs.db"
    db.init_db(str(path))
    try:
        assert path.exists()
        assert db.fetch_runs() == []
    finally:
        db.close_db()


def test_fetch_without_ledger_returns_empty():
    db.close_db()
    assert db.fetch_runs() == []
    assert db.fetch_logs(level="INFO") == []
