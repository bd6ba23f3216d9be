"""Human-in-the-loop review: draft, queue, decide, finalize, feed back.

Drafts are grounded in domain retrieval plus the most relevant prior
expert feedback, then parked as pending review items. A decision is a
one-shot, first-writer-wins transition; the losing caller in any race
gets AlreadyDecided. Every decision writes one feedback memory record,
which future drafts for similar queries pull back into their prompt.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from enum import Enum

from verticore.errors import (
    AlreadyDecided,
    EmptyQuery,
    MissingReplacement,
    StillPending,
    UnexpectedReplacement,
    UnknownDomain,
    UnknownReview,
)
from verticore.events import EventKind
from verticore.memory import MemoryKind
from verticore.reasoning import CompletionRequest
from verticore.router import CONTEXT_SEPARATOR, DocRef, FinalResponse, Provenance
from verticore.skills import RiskAssessment, Verdict, assessment_from_payload


class ReviewStatus(str, Enum):
    PENDING = "pending"
    APPROVED = "approved"
    REJECTED = "rejected"
    MODIFIED = "modified"


TERMINAL_STATUSES = (ReviewStatus.APPROVED, ReviewStatus.REJECTED, ReviewStatus.MODIFIED)


@dataclass
class ReviewItem:
    review_id: str
    query_id: str
    session_id: str
    domain_tag: str
    persona: str
    query_text: str
    draft: str
    rendered_prompt: str
    documents: tuple[DocRef, ...]
    risk: RiskAssessment
    created_seq: int
    status: ReviewStatus = ReviewStatus.PENDING
    expert_note: str | None = None
    replacement_text: str | None = None
    decided_seq: int | None = None
    feedback_seq: int | None = None

    def to_payload(self) -> dict:
        return {
            "review_id": self.review_id,
            "query_id": self.query_id,
            "session_id": self.session_id,
            "domain_tag": self.domain_tag,
            "persona": self.persona,
            "query_text": self.query_text,
            "draft": self.draft,
            "rendered_prompt": self.rendered_prompt,
            "documents": [d.to_payload() for d in self.documents],
            "risk": self.risk.to_payload(),
            "created_seq": self.created_seq,
            "status": self.status.value,
            "expert_note": self.expert_note,
            "replacement_text": self.replacement_text,
            "decided_seq": self.decided_seq,
        }

    def summary(self) -> dict:
        return {
            "review_id": self.review_id,
            "query_id": self.query_id,
            "session_id": self.session_id,
            "query_text": self.query_text,
            "status": self.status.value,
            "created_seq": self.created_seq,
        }


def item_from_payload(payload: dict) -> ReviewItem:
    return ReviewItem(
        review_id=payload["review_id"],
        query_id=payload["query_id"],
        session_id=payload["session_id"],
        domain_tag=payload["domain_tag"],
        persona=payload["persona"],
        query_text=payload["query_text"],
        draft=payload["draft"],
        rendered_prompt=payload["rendered_prompt"],
        documents=tuple(DocRef(d[0], d[1], d[2]) for d in payload["documents"]),
        risk=assessment_from_payload(payload["risk"]),
        created_seq=payload["created_seq"],
    )


def feedback_content(item: ReviewItem) -> str:
    """Canonical feedback serialization: fixed-order key=value lines.

    The query echo keeps repeat queries close in embedding space, which
    is what ranks this record back into future draft prompts.
    """
    return "\n".join(
        [
            f"query={item.query_text}",
            f"status={item.status.value}",
            f"note={item.expert_note or ''}",
            f"replacement={item.replacement_text or ''}",
            f"review={item.review_id}",
        ]
    )


class ReviewRegistry:
    """Insertion-ordered review items with serialized decisions."""

    def __init__(self) -> None:
        self._items: dict[str, ReviewItem] = {}
        self.lock = threading.Lock()

    def add(self, item: ReviewItem) -> None:
        self._items[item.review_id] = item

    def get(self, review_id: str) -> ReviewItem:
        try:
            return self._items[review_id]
        except KeyError:
            raise UnknownReview(f"no review item: {review_id}") from None

    def pending(self) -> list[ReviewItem]:
        return [item for item in self._items.values() if item.status is ReviewStatus.PENDING]

    def items(self) -> list[ReviewItem]:
        return list(self._items.values())

    def apply_decision(
        self,
        review_id: str,
        status: ReviewStatus,
        note: str | None,
        replacement_text: str | None,
        decided_seq: int,
        feedback_seq: int | None = None,
    ) -> ReviewItem:
        """Transition used by both the live path and replay."""
        item = self.get(review_id)
        if item.status is not ReviewStatus.PENDING:
            raise AlreadyDecided(f"review {review_id} already {item.status.value}")
        item.status = status
        item.expert_note = note
        item.replacement_text = replacement_text
        item.decided_seq = decided_seq
        item.feedback_seq = feedback_seq
        return item

    def canonical_state(self) -> list[dict]:
        return [item.to_payload() for _, item in sorted(self._items.items())]


def validate_decision(status: ReviewStatus, replacement_text: str | None) -> None:
    if status not in TERMINAL_STATUSES:
        raise ValueError(f"decision status must be terminal, got {status.value}")
    if status is ReviewStatus.MODIFIED and not (replacement_text and replacement_text.strip()):
        raise MissingReplacement("modified decisions require replacement_text")
    if status is not ReviewStatus.MODIFIED and replacement_text is not None:
        raise UnexpectedReplacement(f"replacement_text not allowed for {status.value}")


class HitlAgent:
    def __init__(self, runtime) -> None:
        self._rt = runtime
        self.registry = ReviewRegistry()
        self._submit_lock = threading.Lock()

    def submit_for_review(
        self,
        query_text: str,
        session_id: str,
        domain_tag: str,
        persona_tag: str | None = None,
        query_id: str | None = None,
    ) -> ReviewItem:
        """Generate a grounded draft and queue it as a pending item.

        Risky drafts are swapped for the refusal text but stay reviewable;
        the blocking assessment rides along for the expert to see.
        """
        rt = self._rt
        if not query_text or not query_text.strip():
            raise EmptyQuery("query must be non-empty")
        if not rt.router.has_route(domain_tag):
            raise UnknownDomain(f"domain not registered: {domain_tag}")
        persona_tag = persona_tag or rt.config.default_persona

        if rt.config.guardrail.screen_inputs:
            gate = rt.guardrail.assess_risk(query_text)
            if gate.verdict is Verdict.BLOCK:
                return self._persist_item(
                    query_text, session_id, domain_tag, persona_tag, query_id,
                    draft=rt.config.router.refusal_text, prompt="", documents=(), risk=gate,
                )

        hits = rt.corpora.search(rt.router.corpus_for(domain_tag), query_text, rt.config.retrieval_k)
        context = CONTEXT_SEPARATOR.join(doc.text for doc, _ in hits)
        feedback = self._recall_feedback(query_text)
        prompt = rt.reasoning.render_template(
            "hitl-draft", {"q": query_text, "ctx": context, "feedback": feedback}
        )
        completion = rt.reasoning.complete(CompletionRequest(prompt=prompt))
        risk = rt.guardrail.assess_risk(completion.text)
        draft = completion.text if risk.verdict is Verdict.ALLOW else rt.config.router.refusal_text
        documents = tuple(DocRef(domain_tag, doc.doc_id, score) for doc, score in hits)
        return self._persist_item(
            query_text, session_id, domain_tag, persona_tag, query_id,
            draft=draft, prompt=prompt, documents=documents, risk=risk,
        )

    def _persist_item(
        self, query_text, session_id, domain_tag, persona_tag, query_id,
        *, draft, prompt, documents, risk,
    ) -> ReviewItem:
        rt = self._rt

        # Persisting under one lock keeps id order, event order, and queue
        # order identical, live and replayed.
        with self._submit_lock:
            query_id = query_id or rt.next_query_id()
            review_id = rt.next_review_id()
            event = rt.events.append(
                EventKind.REVIEW_CREATED,
                payload_builder=lambda seq: {
                    "review_id": review_id,
                    "query_id": query_id,
                    "session_id": session_id,
                    "domain_tag": domain_tag,
                    "persona": persona_tag,
                    "query_text": query_text,
                    "draft": draft,
                    "rendered_prompt": prompt,
                    "documents": [d.to_payload() for d in documents],
                    "risk": risk.to_payload(),
                    "created_seq": seq,
                },
            )
            item = item_from_payload(event.payload)
            self.registry.add(item)
            rt.register_pending_query(item)
        return item

    def _recall_feedback(self, query_text: str) -> str:
        limit = self._rt.config.hitl.feedback_k
        if limit < 1:
            return self._rt.config.hitl.no_feedback_marker
        found = self._rt.memory.recall_relevant(query_text, limit, kind=MemoryKind.FEEDBACK)
        if not found:
            return self._rt.config.hitl.no_feedback_marker
        return "\n".join(record.content for record, _ in found)

    def list_pending(self) -> list[ReviewItem]:
        return self.registry.pending()

    def decide(
        self,
        review_id: str,
        status: ReviewStatus | str,
        note: str | None = None,
        replacement_text: str | None = None,
    ) -> ReviewItem:
        """First writer wins; everyone else gets AlreadyDecided."""
        rt = self._rt
        status = ReviewStatus(status)
        with self.registry.lock:
            item = self.registry.get(review_id)
            if item.status is not ReviewStatus.PENDING:
                raise AlreadyDecided(f"review {review_id} already {item.status.value}")
            validate_decision(status, replacement_text)
            event = rt.events.append(
                EventKind.REVIEW_DECIDED,
                {
                    "review_id": review_id,
                    "status": status.value,
                    "note": note,
                    "replacement_text": replacement_text,
                },
            )
            self.registry.apply_decision(
                review_id, status, note, replacement_text, event.event_seq
            )
            _, feedback_seq = rt.remember(
                item.session_id, MemoryKind.FEEDBACK, feedback_content(item)
            )
            item.feedback_seq = feedback_seq
        return item

    def finalize(self, review_id: str, persona_tag: str | None = None) -> FinalResponse:
        """Turn a decided item into the user-facing response.

        Approved delivers the draft, modified delivers the replacement,
        rejected delivers the rejection notice and none of the draft.
        """
        rt = self._rt
        item = self.registry.get(review_id)
        if item.status is ReviewStatus.PENDING:
            raise StillPending(f"review {review_id} has no decision yet")
        if item.status is ReviewStatus.APPROVED:
            body = item.draft
        elif item.status is ReviewStatus.MODIFIED:
            body = item.replacement_text or ""
        else:
            body = rt.config.hitl.rejection_text
        persona_tag = persona_tag or item.persona
        persona = rt.reasoning.persona(persona_tag)
        framed = rt.reasoning.apply_persona(body, persona)
        _, memory_seq = rt.remember(
            item.session_id, MemoryKind.INTERACTION, f"user: {item.query_text}\nagent: {body}"
        )
        trail = [item.created_seq]
        if item.decided_seq is not None:
            trail.append(item.decided_seq)
        if item.feedback_seq is not None:
            trail.append(item.feedback_seq)
        trail.append(memory_seq)
        return FinalResponse(
            query_id=item.query_id,
            text=framed,
            persona=persona_tag,
            provenance=Provenance(
                pattern="hitl",
                domains_touched=(item.domain_tag,),
                documents=item.documents,
                risk=item.risk,
                decision_trail=tuple(trail),
            ),
        )
