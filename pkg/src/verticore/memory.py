"""Session memory: append-only records with sequence and similarity recall.

The store itself is pure in-process state. Persistence happens one level
up: the service appends a memory event for every record and rebuilds the
store by replaying those events through :meth:`MemoryStore.apply`.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from verticore.embedding import cosine, embed
from verticore.errors import EmptyContent


class MemoryKind(str, Enum):
    INTERACTION = "interaction"
    PREFERENCE = "preference"
    FEEDBACK = "feedback"
    DOMAIN_NOTE = "domain-note"


@dataclass(frozen=True)
class MemoryRecord:
    record_id: str
    session_id: str
    seq: int
    kind: MemoryKind
    content: str
    embedding: tuple[float, ...]

    def to_payload(self) -> dict:
        # Embedding is recomputable from content, so it never serializes.
        return {
            "record_id": self.record_id,
            "session_id": self.session_id,
            "seq": self.seq,
            "kind": self.kind.value,
            "content": self.content,
        }


def record_from_payload(payload: dict) -> MemoryRecord:
    return MemoryRecord(
        record_id=payload["record_id"],
        session_id=payload["session_id"],
        seq=int(payload["seq"]),
        kind=MemoryKind(payload["kind"]),
        content=payload["content"],
        embedding=embed(payload["content"]),
    )


class MemoryStore:
    """Per-session ordered history plus cross-session similarity recall."""

    def __init__(self) -> None:
        self._records: list[MemoryRecord] = []
        self._sessions: dict[str, list[MemoryRecord]] = {}
        self._count = 0

    def __len__(self) -> int:
        return len(self._records)

    def append(self, session_id: str, kind: MemoryKind, content: str) -> MemoryRecord:
        """Store content under the session's next sequence number."""
        if not content or not content.strip():
            raise EmptyContent("memory content must be non-empty")
        kind = MemoryKind(kind)
        self._count += 1
        record = MemoryRecord(
            record_id=f"mem-{self._count:08d}",
            session_id=session_id,
            seq=len(self._sessions.get(session_id, ())) + 1,
            kind=kind,
            content=content,
            embedding=embed(content),
        )
        self._store(record)
        return record

    def apply(self, record: MemoryRecord) -> MemoryRecord:
        """Re-apply a record rebuilt from the event log.

        Sequence numbers must arrive contiguously per session, exactly as
        they were assigned live.
        """
        expected = len(self._sessions.get(record.session_id, ())) + 1
        if record.seq != expected:
            raise ValueError(
                f"out-of-order memory record for session {record.session_id}: "
                f"seq {record.seq}, expected {expected}"
            )
        self._count += 1
        self._store(record)
        return record

    def _store(self, record: MemoryRecord) -> None:
        self._records.append(record)
        self._sessions.setdefault(record.session_id, []).append(record)

    def recall_session(self, session_id: str, limit: int) -> list[MemoryRecord]:
        """Last `limit` records of a session in ascending seq order."""
        if limit < 1:
            raise ValueError("limit must be >= 1")
        rows = self._sessions.get(session_id, [])
        return list(rows[-limit:])

    def recall_relevant(
        self,
        query_text: str,
        k: int,
        session_id: str | None = None,
        kind: MemoryKind | None = None,
    ) -> list[tuple[MemoryRecord, float]]:
        """Top-k records by cosine similarity to the query.

        Searches every session unless session_id narrows it; kind narrows
        to one record kind. Ties break toward the older record_id.
        """
        if not query_text or not query_text.strip():
            raise EmptyContent("query must be non-empty")
        if k < 1:
            raise ValueError("k must be >= 1")
        query_vec = embed(query_text)
        scored = [
            (record, cosine(query_vec, record.embedding))
            for record in self._records
            if (session_id is None or record.session_id == session_id)
            and (kind is None or record.kind == kind)
        ]
        scored.sort(key=lambda pair: (-pair[1], pair[0].record_id))
        return scored[:k]

    def records(self) -> list[MemoryRecord]:
        return list(self._records)

    def canonical_state(self) -> list[dict]:
        return [r.to_payload() for r in self._records]
