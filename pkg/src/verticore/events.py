"""Append-only event log with canonical hashing and deterministic replay.

Every state mutation in the runtime lands here as one JSON line. The log
is the system of record: replaying it reconstructs all stores exactly,
and the per-event payload hash plus gapless sequence makes tampering and
truncation detectable line by line.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Callable, Iterator

from verticore.errors import CorruptLog


class EventKind(str, Enum):
    MEMORY_APPEND = "memory-append"
    DOC_UPSERT = "doc-upsert"
    DOC_DELETE = "doc-delete"
    KG_ADD = "kg-add"
    ROUTING_DECISION = "routing-decision"
    ORCHESTRATION = "orchestration"
    REVIEW_CREATED = "review-created"
    REVIEW_DECIDED = "review-decided"
    RESPONSE_DELIVERED = "response-delivered"
    CONFIG_LOADED = "config-loaded"


@dataclass(frozen=True)
class EventRecord:
    event_seq: int
    ts: str
    kind: EventKind
    payload: dict
    payload_hash: str


def canonical_json(value) -> str:
    """The one serialization used for hashing and digests."""
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def payload_digest(payload: dict) -> str:
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


_DETERMINISTIC_EPOCH = 1_577_836_800  # 2020-01-01T00:00:00Z


def deterministic_timestamp(seed: int, event_seq: int) -> str:
    moment = _DETERMINISTIC_EPOCH + (seed % 1_000_000) + event_seq
    return datetime.fromtimestamp(moment, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


class EventLog:
    """Serialized appends to a JSON Lines file, one EventRecord per line.

    Opening an existing log verifies it and continues its sequence, so a
    restarted host keeps one gapless history.
    """

    def __init__(self, path: Path, seed: int = 0, deterministic: bool = True) -> None:
        self.path = Path(path)
        self._seed = seed
        self._deterministic = deterministic
        self._lock = threading.Lock()
        self._records: list[EventRecord] = []
        if self.path.exists() and self.path.stat().st_size > 0:
            self._records = list(read_events(self.path))
        self._handle = open(self.path, "a", encoding="utf-8")

    @property
    def last_seq(self) -> int:
        return len(self._records)

    def append(
        self,
        kind: EventKind,
        payload: dict | None = None,
        payload_builder: Callable[[int], dict] | None = None,
    ) -> EventRecord:
        """Append one event; the sequence number is reserved under the lock.

        payload_builder lets a caller fold the assigned sequence number
        into the payload itself (responses list their own trail).
        """
        with self._lock:
            seq = len(self._records) + 1
            if payload_builder is not None:
                payload = payload_builder(seq)
            assert payload is not None
            if self._deterministic:
                ts = deterministic_timestamp(self._seed, seq)
            else:
                ts = datetime.now(tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
            record = EventRecord(
                event_seq=seq,
                ts=ts,
                kind=kind,
                payload=payload,
                payload_hash=payload_digest(payload),
            )
            self._handle.write(serialize_event(record) + "\n")
            self._handle.flush()
            self._records.append(record)
            return record

    def records(self) -> list[EventRecord]:
        with self._lock:
            return list(self._records)

    def find(self, kind: EventKind, **payload_match) -> list[EventRecord]:
        """Events of one kind whose payload carries the given values."""
        return [
            r
            for r in self.records()
            if r.kind is kind
            and all(r.payload.get(k) == v for k, v in payload_match.items())
        ]

    def close(self) -> None:
        with self._lock:
            if not self._handle.closed:
                self._handle.close()


def serialize_event(record: EventRecord) -> str:
    return canonical_json(
        {
            "event_seq": record.event_seq,
            "ts": record.ts,
            "kind": record.kind.value,
            "payload": record.payload,
            "payload_hash": record.payload_hash,
        }
    )


def read_events(path: Path) -> Iterator[EventRecord]:
    """Parse and verify a closed log: gapless sequence, matching hashes.

    Raises CorruptLog naming the first bad line.
    """
    expected_seq = 1
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                row = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise CorruptLog(line_no, f"not valid JSON: {exc}") from exc
            try:
                record = EventRecord(
                    event_seq=row["event_seq"],
                    ts=row["ts"],
                    kind=EventKind(row["kind"]),
                    payload=row["payload"],
                    payload_hash=row["payload_hash"],
                )
            except (KeyError, ValueError) as exc:
                raise CorruptLog(line_no, f"bad event record: {exc}") from exc
            if record.event_seq != expected_seq:
                raise CorruptLog(
                    line_no, f"event_seq {record.event_seq}, expected {expected_seq}"
                )
            if payload_digest(record.payload) != record.payload_hash:
                raise CorruptLog(line_no, "payload hash mismatch")
            expected_seq += 1
            yield record
