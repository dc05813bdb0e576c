import json
import logging
import os
import sqlite3
import time
from typing import Any, Dict, List, Optional, Sequence

from config import config

logger = logging.getLogger("cavity_qed")

SCHEMA = """
CREATE TABLE IF NOT EXISTS logs (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    ts INTEGER NOT NULL,
    level TEXT NOT NULL,
    message TEXT NOT NULL
);

CREATE TABLE IF NOT EXISTS runs (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    ts INTEGER NOT NULL,
    command TEXT NOT NULL, -- sweep / compare
    argv TEXT NOT NULL,    -- JSON 数组
    exit_code INTEGER NOT NULL,
    out_path TEXT,
    rows INTEGER DEFAULT 0
);
"""

# 当前打开的台账路径；None 时只写 logging
_db_path: Optional[str] = config.DB_PATH


def get_conn(path: Optional[str] = None) -> sqlite3.Connection:
    conn = sqlite3.connect(path or _db_path, check_same_thread=False)
    conn.row_factory = sqlite3.Row
    return conn


def init_db(path: str):
    """打开（必要时创建）运行台账，之后的 log() 同时写入 logs 表"""
    global _db_path
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    conn = get_conn(path)
    conn.executescript(SCHEMA)
    conn.commit()
    conn.close()
    _db_path = path


def close_db():
    global _db_path
    _db_path = None


def log(level: str, message: str):
    level = level.upper()
    logger.log(getattr(logging, level, logging.INFO), message)
    if _db_path is None:
        return
    try:
        conn = get_conn()
        cur = conn.cursor()
        cur.execute("INSERT INTO logs(ts, level, message) VALUES (?, ?, ?)", (int(time.time() * 1000), level, message))
        conn.commit()
        conn.close()
    except sqlite3.Error as e:
        logger.warning(f"日志写入台账失败: {e}")


def record_run(command: str, argv: Sequence[str], exit_code: int, out_path: Optional[str] = None, rows: int = 0):
    if _db_path is None:
        return
    conn = get_conn()
    cur = conn.cursor()
    cur.execute(
        "INSERT INTO runs(ts, command, argv, exit_code, out_path, rows) VALUES (?, ?, ?, ?, ?, ?)",
        (int(time.time() * 1000), command, json.dumps(list(argv)), exit_code, out_path, rows),
    )
    conn.commit()
    conn.close()


def fetch_runs(limit: int = 30) -> List[Dict[str, Any]]:
    """最近的运行记录，按 id 降序"""
    if _db_path is None:
        return []
    conn = get_conn()
    cur = conn.cursor()
    cur.execute("SELECT * FROM runs ORDER BY id DESC LIMIT ?", (limit,))
    rows = cur.fetchall()
    conn.close()
    out = [dict(r) for r in rows]
    for r in out:
        r["argv"] = json.loads(r["argv"])
    return out


def fetch_logs(limit: int = 100, level: Optional[str] = None) -> List[Dict[str, Any]]:
    if _db_path is None:
        return []
    conn = get_conn()
    cur = conn.cursor()
    if level:
        cur.execute("SELECT ts, level, message FROM logs WHERE level=? ORDER BY id DESC LIMIT ?", (level.upper(), limit))
    else:
        cur.execute("SELECT ts, level, message FROM logs ORDER BY id DESC LIMIT ?", (limit,))
    rows = cur.fetchall()
    conn.close()
    return [dict(r) for r in rows]
