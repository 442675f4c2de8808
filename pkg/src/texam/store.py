"""Durable transactional persistence for users, exams, attempts, renders.

Backed by sqlite3 in WAL mode with synchronous=FULL, so committed
transactions survive a killed process. Records are JSON blobs plus the
indexed columns the list operations filter on. Every transaction runs
on its own connection; cross-process and cross-thread writers serialize
through sqlite's locking, and uniqueness races surface as ConflictError.
"""

from __future__ import annotations

import json
import sqlite3
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any

FORMAT_MARKER = "texam-store"
FORMAT_VERSION = 1

_BUSY_TIMEOUT_MS = 5000


def _signed64(value: int) -> int:
    """Unsigned 64-bit hash -> the signed value sqlite can index."""
    return value - (1 << 64) if value >= (1 << 63) else value


class StoreError(Exception):
    """Storage failure unrelated to contention."""


class ConflictError(StoreError):
    """Uniqueness violation or lost race; the caller may retry or give up."""


class FormatError(StoreError):
    """The data directory holds something this version cannot open."""


class Role(Enum):
    MANAGER = "Manager"
    STUDENT = "Student"


@dataclass(frozen=True)
class User:
    id: str
    username: str
    password_hash: bytes  # salted hash; plaintext never reaches the store
    role: Role

    def to_record(self) -> dict:
        return {"id": self.id, "username": self.username,
                "password_hash": self.password_hash.hex(),
                "role": self.role.value}

    @staticmethod
    def from_record(d: dict) -> "User":
        return User(d["id"], d["username"], bytes.fromhex(d["password_hash"]),
                    Role(d["role"]))


_SCHEMA = (
    """CREATE TABLE meta (
           key TEXT PRIMARY KEY,
           value TEXT NOT NULL
       )""",
    """CREATE TABLE users (
           id TEXT PRIMARY KEY,
           username TEXT NOT NULL UNIQUE,
           record TEXT NOT NULL
       )""",
    """CREATE TABLE exams (
           id TEXT PRIMARY KEY,
           state TEXT NOT NULL,
           record TEXT NOT NULL
       )""",
    """CREATE TABLE attempts (
           id TEXT PRIMARY KEY,
           exam_id TEXT NOT NULL,
           student_id TEXT NOT NULL,
           state TEXT NOT NULL,
           record TEXT NOT NULL,
           UNIQUE (exam_id, student_id)
       )""",
    """CREATE TABLE cache (
           source_hash INTEGER NOT NULL,
           renderer_version INTEGER NOT NULL,
           record TEXT NOT NULL,
           PRIMARY KEY (source_hash, renderer_version)
       )""",
    "CREATE INDEX attempts_by_exam ON attempts (exam_id)",
)

# collection name -> (table, indexed columns copied from the record)
_COLLECTIONS: dict[str, tuple[str, tuple[str, ...]]] = {
    "users": ("users", ("username",)),
    "exams": ("exams", ("state",)),
    "attempts": ("attempts", ("exam_id", "student_id", "state")),
}


class Transaction:
    """A single BEGIN IMMEDIATE scope; use via Store.transact()."""

    def __init__(self, conn: sqlite3.Connection):
        self._conn = conn

    # -- generic record operations ------------------------------------

    def put_record(self, collection: str, record: dict) -> None:
        """Insert or overwrite by id; uniqueness violations raise ConflictError."""
        if collection == "cache":
            self.put_cache(record)
            return
        table, indexed = _COLLECTIONS[collection]
        columns = ["id", *indexed, "record"]
        values = [record["id"], *(record[c] for c in indexed),
                  json.dumps(record, ensure_ascii=False)]
        assignments = ", ".join(f"{c} = excluded.{c}" for c in columns[1:])
        sql = (f"INSERT INTO {table} ({', '.join(columns)}) "
               f"VALUES ({', '.join('?' * len(columns))}) "
               f"ON CONFLICT (id) DO UPDATE SET {assignments}")
        try:
            self._conn.execute(sql, values)
        except sqlite3.IntegrityError as e:
            raise ConflictError(str(e)) from e

    def get_record(self, collection: str, key: Any) -> dict | None:
        if collection == "cache":
            return self.get_cache(*key)
        table, _ = _COLLECTIONS[collection]
        row = self._conn.execute(
            f"SELECT record FROM {table} WHERE id = ?", (key,)).fetchone()
        return None if row is None else json.loads(row[0])

    def list_records(self, collection: str, **filters: Any) -> list[dict]:
        """Equality filters on indexed columns only; ordered by id."""
        table, indexed = _COLLECTIONS[collection]
        clauses = []
        values = []
        for column, value in filters.items():
            if column not in indexed:
                raise StoreError(f"{collection} has no index on {column!r}")
            clauses.append(f"{column} = ?")
            values.append(value)
        where = f" WHERE {' AND '.join(clauses)}" if clauses else ""
        rows = self._conn.execute(
            f"SELECT record FROM {table}{where} ORDER BY id", values).fetchall()
        return [json.loads(r[0]) for r in rows]

    def delete_record(self, collection: str, key: str) -> None:
        table, _ = _COLLECTIONS[collection]
        self._conn.execute(f"DELETE FROM {table} WHERE id = ?", (key,))

    # -- secondary lookups ---------------------------------------------

    def get_user_by_name(self, username: str) -> dict | None:
        row = self._conn.execute(
            "SELECT record FROM users WHERE username = ?", (username,)).fetchone()
        return None if row is None else json.loads(row[0])

    def find_attempt(self, exam_id: str, student_id: str) -> dict | None:
        row = self._conn.execute(
            "SELECT record FROM attempts WHERE exam_id = ? AND student_id = ?",
            (exam_id, student_id)).fetchone()
        return None if row is None else json.loads(row[0])

    def count(self, collection: str) -> int:
        table, _ = _COLLECTIONS[collection]
        return self._conn.execute(f"SELECT COUNT(*) FROM {table}").fetchone()[0]

    # -- render cache ---------------------------------------------------

    def put_cache(self, record: dict) -> None:
        try:
            self._conn.execute(
                "INSERT INTO cache (source_hash, renderer_version, record) "
                "VALUES (?, ?, ?) "
                "ON CONFLICT (source_hash, renderer_version) "
                "DO UPDATE SET record = excluded.record",
                (_signed64(record["source_hash"]), record["renderer_version"],
                 json.dumps(record, ensure_ascii=False)))
        except sqlite3.IntegrityError as e:
            raise ConflictError(str(e)) from e

    def get_cache(self, source_hash: int, renderer_version: int) -> dict | None:
        row = self._conn.execute(
            "SELECT record FROM cache "
            "WHERE source_hash = ? AND renderer_version = ?",
            (_signed64(source_hash), renderer_version)).fetchone()
        return None if row is None else json.loads(row[0])


class Store:
    """Handle on one data directory; cheap to construct, safe to share."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._init_or_check()

    def _connect(self) -> sqlite3.Connection:
        try:
            conn = sqlite3.connect(self.path, timeout=_BUSY_TIMEOUT_MS / 1000,
                                   isolation_level=None)
        except sqlite3.Error as e:
            raise StoreError(f"cannot open {self.path}: {e}") from e
        try:
            conn.execute("PRAGMA journal_mode = WAL")
            conn.execute("PRAGMA synchronous = FULL")
            conn.execute("PRAGMA foreign_keys = ON")
        except sqlite3.DatabaseError as e:
            conn.close()
            raise FormatError(
                f"{self.path} is not a recognized data file: {e}") from e
        return conn

    def _init_or_check(self) -> None:
        conn = self._connect()
        try:
            has_meta = conn.execute(
                "SELECT name FROM sqlite_master "
                "WHERE type = 'table' AND name = 'meta'").fetchone()
            if has_meta is None:
                empty = conn.execute(
                    "SELECT COUNT(*) FROM sqlite_master").fetchone()[0] == 0
                if not empty:
                    raise FormatError(
                        f"{self.path} exists but is not a recognized data file")
                conn.execute("BEGIN IMMEDIATE")
                for statement in _SCHEMA:
                    conn.execute(statement)
                conn.execute("INSERT INTO meta (key, value) VALUES (?, ?)",
                             ("format", FORMAT_MARKER))
                conn.execute("INSERT INTO meta (key, value) VALUES (?, ?)",
                             ("version", str(FORMAT_VERSION)))
                conn.execute("COMMIT")
                return
            meta = dict(conn.execute("SELECT key, value FROM meta").fetchall())
            if meta.get("format") != FORMAT_MARKER:
                raise FormatError(f"{self.path} has format marker "
                                  f"{meta.get('format')!r}, not {FORMAT_MARKER!r}")
            if meta.get("version") != str(FORMAT_VERSION):
                raise FormatError(
                    f"{self.path} is format version {meta.get('version')}, "
                    f"this build reads version {FORMAT_VERSION}")
        except sqlite3.DatabaseError as e:
            raise FormatError(f"{self.path} is not a recognized data file: {e}") from e
        finally:
            conn.close()

    def transact(self) -> "_TransactionContext":
        """Context manager: all-or-nothing scope, ConflictError on races."""
        return _TransactionContext(self)

    # -- one-shot conveniences ------------------------------------------

    def put_record(self, collection: str, record: dict) -> None:
        with self.transact() as txn:
            txn.put_record(collection, record)

    def get_record(self, collection: str, key: Any) -> dict | None:
        with self.transact() as txn:
            return txn.get_record(collection, key)

    def list_records(self, collection: str, **filters: Any) -> list[dict]:
        with self.transact() as txn:
            return txn.list_records(collection, **filters)

    def get_user_by_name(self, username: str) -> dict | None:
        with self.transact() as txn:
            return txn.get_user_by_name(username)

    def find_attempt(self, exam_id: str, student_id: str) -> dict | None:
        with self.transact() as txn:
            return txn.find_attempt(exam_id, student_id)

    def put_cache(self, record: dict) -> None:
        with self.transact() as txn:
            txn.put_cache(record)

    def get_cache(self, source_hash: int, renderer_version: int) -> dict | None:
        with self.transact() as txn:
            return txn.get_cache(source_hash, renderer_version)


class _TransactionContext:
    def __init__(self, store: Store):
        self._store = store
        self._conn: sqlite3.Connection | None = None

    def __enter__(self) -> Transaction:
        conn = self._store._connect()
        try:
            conn.execute("BEGIN IMMEDIATE")
        except sqlite3.OperationalError as e:
            conn.close()
            raise ConflictError(str(e)) from e
        self._conn = conn
        return Transaction(conn)

    def __exit__(self, exc_type, exc, tb) -> bool:
        assert self._conn is not None
        try:
            if exc_type is None:
                self._conn.execute("COMMIT")
            else:
                self._conn.execute("ROLLBACK")
        finally:
            self._conn.close()
        return False
