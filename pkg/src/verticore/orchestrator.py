"""Lead-agent pattern: decompose, dispatch specialists, validate, merge.

Three specialist agents mirror the tool split: agent-1-vector over the
domain corpora, agent-2-kg over the triple store, agent-3-search over
the web client; agent-4-guardrail screens the pooled retrievals. Subtasks
may run on any schedule; aggregation sorts by subtask index, so the
synthesized answer is schedule-independent by construction.
"""

from __future__ import annotations

import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from verticore.errors import EmptyQuery, VerticoreError
from verticore.events import EventKind
from verticore.knowledge import SearchResult, Triple
from verticore.memory import MemoryKind
from verticore.reasoning import CompletionRequest
from verticore.router import CONTEXT_SEPARATOR, DocRef, FinalResponse, Provenance
from verticore.skills import RiskAssessment, Verdict


class Capability(str, Enum):
    VECTOR_SEARCH = "vector-search"
    KNOWLEDGE_GRAPH = "knowledge-graph"
    WEB_SEARCH = "web-search"


AGENT_NAMES = {
    Capability.VECTOR_SEARCH: "agent-1-vector",
    Capability.KNOWLEDGE_GRAPH: "agent-2-kg",
    Capability.WEB_SEARCH: "agent-3-search",
}
GUARDRAIL_AGENT = "agent-4-guardrail"


@dataclass(frozen=True)
class Subtask:
    index: int
    description: str
    capability: Capability
    target_domain: str | None = None

    def to_payload(self) -> dict:
        return {
            "index": self.index,
            "description": self.description,
            "capability": self.capability.value,
            "target_domain": self.target_domain,
        }


@dataclass(frozen=True)
class AgentProvenance:
    documents: tuple[DocRef, ...] = ()
    triples: tuple[Triple, ...] = ()
    results: tuple[SearchResult, ...] = ()

    def to_payload(self) -> dict:
        return {
            "documents": [d.to_payload() for d in self.documents],
            "triples": [[t.subject, t.predicate, t.object] for t in self.triples],
            "results": [
                {"title": r.title, "snippet": r.snippet, "source_url": r.source_url, "rank": r.rank}
                for r in self.results
            ],
        }


@dataclass(frozen=True)
class AgentResult:
    subtask_index: int
    agent_name: str
    content: str
    provenance: AgentProvenance = field(default_factory=AgentProvenance)
    duration: float = 0.0

    def to_payload(self) -> dict:
        # Durations are wall-clock noise; they never serialize.
        return {
            "subtask_index": self.subtask_index,
            "agent_name": self.agent_name,
            "content": self.content,
            "provenance": self.provenance.to_payload(),
        }


@dataclass(frozen=True)
class OrchestrationRecord:
    query_id: str
    plan: tuple[Subtask, ...]
    results: tuple[AgentResult, ...]
    assessment: RiskAssessment
    outcome: str  # delivered | blocked

    def to_payload(self) -> dict:
        return {
            "plan": [s.to_payload() for s in self.plan],
            "results": [r.to_payload() for r in self.results],
            "assessment": self.assessment.to_payload(),
            "guardrail_agent": GUARDRAIL_AGENT,
            "outcome": self.outcome,
        }


_WORDS = re.compile(r"[0-9A-Za-z]+")


def _phrase_in_tokens(phrase: str, tokens: set[str]) -> bool:
    words = _WORDS.findall(phrase.lower())
    return bool(words) and all(w in tokens for w in words)


class OrchestratorAgent:
    """The Fig.-style lead agent over the three retrieval specialists."""

    def __init__(self, runtime, stagger: Callable[[Subtask], None] | None = None) -> None:
        self._rt = runtime
        # Test seam: injected per-subtask delay to randomize schedules.
        self.stagger = stagger

    def plan(self, query_text: str, query_id: str = "") -> list[Subtask]:
        """Decompose the query and resolve each piece to a specialist.

        Vector-search subtasks get a target domain from the router's
        intent classifier applied to the subtask description.
        """
        subtasks, _ = self._plan_with_trail(query_text, query_id)
        return subtasks

    def _plan_with_trail(self, query_text: str, query_id: str) -> tuple[list[Subtask], list[int]]:
        if not query_text or not query_text.strip():
            raise EmptyQuery("query must be non-empty")
        drafts = self._rt.reasoning.decompose(query_text)
        subtasks = []
        trail = []
        for index, draft in enumerate(drafts):
            try:
                capability = Capability(draft.capability_hint)
            except ValueError:
                capability = Capability.VECTOR_SEARCH
            target = None
            if capability is Capability.VECTOR_SEARCH:
                decision = self._rt.router.classify_intent(
                    draft.description, query_id=query_id
                )
                event = self._rt.events.append(
                    EventKind.ROUTING_DECISION,
                    {
                        "query_id": query_id,
                        "subtask_index": index,
                        "decision": decision.to_payload(),
                    },
                )
                trail.append(event.event_seq)
                target = decision.chosen_domain
            subtasks.append(
                Subtask(
                    index=index,
                    description=draft.description,
                    capability=capability,
                    target_domain=target,
                )
            )
        return subtasks, trail

    def dispatch(self, plan: list[Subtask], session_id: str = "") -> list[AgentResult]:
        """Run every subtask, possibly concurrently; one result each.

        Failures degrade to the configured failure marker instead of
        aborting the batch. Results always come back in index order.
        """
        if not plan:
            raise ValueError("plan must be non-empty")
        results: list[AgentResult | None] = [None] * len(plan)
        workers = min(self._rt.config.parallelism, len(plan))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [(subtask, pool.submit(self._run_subtask, subtask)) for subtask in plan]
            for subtask, future in futures:
                results[subtask.index] = future.result()
        return [r for r in results if r is not None]

    def _run_subtask(self, subtask: Subtask) -> AgentResult:
        rt = self._rt
        agent_name = AGENT_NAMES[subtask.capability]
        started = time.perf_counter()
        if self.stagger is not None:
            self.stagger(subtask)
        try:
            if subtask.capability is Capability.VECTOR_SEARCH:
                hits = rt.corpora.search(
                    subtask.target_domain, subtask.description, rt.config.retrieval_k
                )
                provenance = AgentProvenance(
                    documents=tuple(
                        DocRef(subtask.target_domain, doc.doc_id, score) for doc, score in hits
                    )
                )
                context = CONTEXT_SEPARATOR.join(doc.text for doc, _ in hits)
            elif subtask.capability is Capability.KNOWLEDGE_GRAPH:
                triples = self._kg_lookup(subtask.description)
                provenance = AgentProvenance(triples=tuple(triples))
                context = "\n".join(f"{t.subject} {t.predicate} {t.object}" for t in triples)
            else:
                found = rt.web_search.search(subtask.description)
                provenance = AgentProvenance(results=tuple(found))
                context = "\n".join(f"{r.title}: {r.snippet} ({r.source_url})" for r in found)
            if not context:
                return self._failed(subtask, agent_name, started)
            prompt = rt.reasoning.render_template(
                "agent-task", {"task": subtask.description, "ctx": context}
            )
            completion = rt.reasoning.complete(CompletionRequest(prompt=prompt))
            return AgentResult(
                subtask_index=subtask.index,
                agent_name=agent_name,
                content=completion.text,
                provenance=provenance,
                duration=time.perf_counter() - started,
            )
        except VerticoreError:
            return self._failed(subtask, agent_name, started)

    def _failed(self, subtask: Subtask, agent_name: str, started: float) -> AgentResult:
        return AgentResult(
            subtask_index=subtask.index,
            agent_name=agent_name,
            content=self._rt.config.orchestrator.failure_marker,
            provenance=AgentProvenance(),
            duration=time.perf_counter() - started,
        )

    def _kg_lookup(self, description: str) -> list[Triple]:
        """Graph query derived from the description: any triple whose
        subject or predicate words all appear in the description."""
        tokens = set(_WORDS.findall(description.lower()))
        matches = [
            t
            for t in self._rt.kg.query("*", "*", "*")
            if _phrase_in_tokens(t.subject, tokens) or _phrase_in_tokens(t.predicate, tokens)
        ]
        matches.sort(key=lambda t: (t.subject, t.predicate, t.object))
        return matches

    def validate(self, results: list[AgentResult]) -> RiskAssessment:
        """Guardrail pass over all retrieved contents in index order."""
        ordered = sorted(results, key=lambda r: r.subtask_index)
        return self._rt.guardrail.assess_risk("\n".join(r.content for r in ordered))

    def synthesize(
        self,
        query_text: str,
        results: list[AgentResult],
        assessment: RiskAssessment,
        persona_tag: str | None = None,
        *,
        query_id: str = "",
        session_id: str = "",
        trail: tuple[int, ...] = (),
    ) -> FinalResponse:
        """Merge specialist outputs into one screened, persona-framed reply."""
        rt = self._rt
        persona_tag = persona_tag or rt.config.default_persona
        persona = rt.reasoning.persona(persona_tag)
        if assessment.verdict is Verdict.BLOCK:
            body = rt.config.router.refusal_text
            risk = assessment
        else:
            parts = CONTEXT_SEPARATOR.join(r.content for r in results)
            prompt = rt.reasoning.render_template("synthesize", {"q": query_text, "parts": parts})
            completion = rt.reasoning.complete(CompletionRequest(prompt=prompt, persona=persona))
            risk = rt.guardrail.assess_risk(completion.text)
            body = completion.text if risk.verdict is Verdict.ALLOW else rt.config.router.refusal_text
        framed = rt.reasoning.apply_persona(body, persona)
        _, memory_seq = rt.remember(
            session_id, MemoryKind.INTERACTION, f"user: {query_text}\nagent: {body}"
        )
        domains: list[str] = []
        documents: list[DocRef] = []
        for result in results:
            for ref in result.provenance.documents:
                documents.append(ref)
                if ref.domain not in domains:
                    domains.append(ref.domain)
        return FinalResponse(
            query_id=query_id,
            text=framed,
            persona=persona_tag,
            provenance=Provenance(
                pattern="orchestrated",
                domains_touched=tuple(domains),
                documents=tuple(documents),
                risk=risk,
                decision_trail=tuple(trail) + (memory_seq,),
            ),
        )

    def run_orchestrated(
        self,
        query_text: str,
        session_id: str,
        persona_tag: str | None = None,
        query_id: str | None = None,
    ) -> FinalResponse:
        rt = self._rt
        query_id = query_id or rt.next_query_id()
        if rt.config.guardrail.screen_inputs:
            gate = rt.guardrail.assess_risk(query_text)
            if gate.verdict is Verdict.BLOCK:
                return self.synthesize(
                    query_text, [], gate, persona_tag, query_id=query_id, session_id=session_id
                )
        plan, plan_events = self._plan_with_trail(query_text, query_id)
        results = self.dispatch(plan, session_id)
        assessment = self.validate(results)
        record = OrchestrationRecord(
            query_id=query_id,
            plan=tuple(plan),
            results=tuple(results),
            assessment=assessment,
            outcome="blocked" if assessment.verdict is Verdict.BLOCK else "delivered",
        )
        event = rt.events.append(
            EventKind.ORCHESTRATION,
            {"query_id": query_id, "pattern": "orchestrated", "record": record.to_payload()},
        )
        return self.synthesize(
            query_text,
            results,
            assessment,
            persona_tag,
            query_id=query_id,
            session_id=session_id,
            trail=tuple(plan_events) + (event.event_seq,),
        )
