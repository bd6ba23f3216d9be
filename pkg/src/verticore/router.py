"""Domain-routing agent and the static workflow-chain baseline.

Intent classification is cosine-to-centroid: each registered domain is
summarized by the normalized mean of its document embeddings and the
query goes to the closest one. The workflow chain is the fixed two-stage
refine-then-answer pipeline kept around as the non-agentic baseline.
"""

from __future__ import annotations

from dataclasses import dataclass

from verticore.embedding import cosine, embed
from verticore.errors import DuplicateDomain, EmptyQuery, NoConfidentRoute, NoDomains, UnknownDomain
from verticore.events import EventKind
from verticore.memory import MemoryKind
from verticore.reasoning import CompletionRequest
from verticore.skills import RiskAssessment, Verdict, assessment_from_payload

CONTEXT_SEPARATOR = "\n---\n"


@dataclass(frozen=True)
class RoutingDecision:
    query_id: str
    chosen_domain: str
    confidence: float
    alternatives: tuple[tuple[str, float], ...]

    def to_payload(self) -> dict:
        return {
            "query_id": self.query_id,
            "chosen_domain": self.chosen_domain,
            "confidence": self.confidence,
            "alternatives": [[tag, score] for tag, score in self.alternatives],
        }


@dataclass(frozen=True)
class DocRef:
    domain: str
    doc_id: str
    score: float

    def to_payload(self) -> list:
        return [self.domain, self.doc_id, self.score]


@dataclass(frozen=True)
class Provenance:
    pattern: str
    domains_touched: tuple[str, ...]
    documents: tuple[DocRef, ...]
    risk: RiskAssessment
    decision_trail: tuple[int, ...]

    def to_payload(self) -> dict:
        return {
            "pattern": self.pattern,
            "domains_touched": list(self.domains_touched),
            "documents": [d.to_payload() for d in self.documents],
            "risk": self.risk.to_payload(),
            "decision_trail": list(self.decision_trail),
        }


@dataclass(frozen=True)
class FinalResponse:
    query_id: str
    text: str
    provenance: Provenance
    persona: str

    def to_payload(self) -> dict:
        return {
            "query_id": self.query_id,
            "text": self.text,
            "persona": self.persona,
            "provenance": self.provenance.to_payload(),
        }


def response_from_payload(payload: dict) -> FinalResponse:
    prov = payload["provenance"]
    return FinalResponse(
        query_id=payload["query_id"],
        text=payload["text"],
        persona=payload["persona"],
        provenance=Provenance(
            pattern=prov["pattern"],
            domains_touched=tuple(prov["domains_touched"]),
            documents=tuple(DocRef(d[0], d[1], d[2]) for d in prov["documents"]),
            risk=assessment_from_payload(prov["risk"]),
            decision_trail=tuple(prov["decision_trail"]),
        ),
    )


class RouterAgent:
    """Classify, retrieve from one domain, generate, screen, deliver."""

    def __init__(self, runtime) -> None:
        self._rt = runtime
        self._routes: dict[str, str] = {}

    def register_domain(self, tag: str, corpus_ref: str | None = None) -> str:
        """Add a route; the referenced corpus must already exist."""
        corpus_ref = corpus_ref or tag
        if tag in self._routes:
            raise DuplicateDomain(f"domain already registered: {tag}")
        if not self._rt.corpora.has_domain(corpus_ref):
            raise UnknownDomain(f"no corpus for domain: {corpus_ref}")
        self._routes[tag] = corpus_ref
        return tag

    def registered_domains(self) -> list[str]:
        return list(self._routes)

    def has_route(self, tag: str) -> bool:
        return tag in self._routes

    def corpus_for(self, tag: str) -> str:
        if tag not in self._routes:
            raise UnknownDomain(f"domain not registered: {tag}")
        return self._routes[tag]

    def classify_intent(self, query_text: str, query_id: str = "") -> RoutingDecision:
        """Score every domain centroid against the query embedding.

        Centroids reflect the live corpus at call time. Ties resolve to
        the lexicographically smallest tag.
        """
        if not self._routes:
            raise NoDomains("no domains registered")
        if not query_text or not query_text.strip():
            raise EmptyQuery("query must be non-empty")
        query_vec = embed(query_text)
        alternatives = [
            (tag, cosine(query_vec, self._rt.corpora.centroid(corpus)))
            for tag, corpus in self._routes.items()
        ]
        alternatives.sort(key=lambda pair: (-pair[1], pair[0]))
        best_tag, best_score = alternatives[0]
        if best_score < self._rt.config.router.min_confidence:
            raise NoConfidentRoute(alternatives)
        return RoutingDecision(
            query_id=query_id,
            chosen_domain=best_tag,
            confidence=best_score,
            alternatives=tuple(alternatives),
        )

    def answer_routed(
        self,
        query_text: str,
        session_id: str,
        persona_tag: str | None = None,
        query_id: str | None = None,
    ) -> FinalResponse:
        rt = self._rt
        query_id = query_id or rt.next_query_id()
        persona_tag = persona_tag or rt.config.default_persona
        persona = rt.reasoning.persona(persona_tag)
        trail: list[int] = []

        if rt.config.guardrail.screen_inputs:
            gate = rt.guardrail.assess_risk(query_text)
            if gate.verdict is Verdict.BLOCK:
                return self._deliver(
                    query_id, query_text, session_id, persona_tag, persona,
                    pattern="router", domains=(), documents=(),
                    body_text=rt.config.router.refusal_text, risk=gate, trail=trail,
                )

        decision = self.classify_intent(query_text, query_id)
        event = rt.events.append(
            EventKind.ROUTING_DECISION,
            {"query_id": query_id, "decision": decision.to_payload()},
        )
        trail.append(event.event_seq)

        hits = rt.corpora.search(
            self._routes[decision.chosen_domain], query_text, rt.config.retrieval_k
        )
        context = CONTEXT_SEPARATOR.join(doc.text for doc, _ in hits)
        prompt = rt.reasoning.render_template("rag-answer", {"q": query_text, "ctx": context})
        completion = rt.reasoning.complete(CompletionRequest(prompt=prompt, persona=persona))
        risk = rt.guardrail.assess_risk(completion.text)
        body = completion.text if risk.verdict is Verdict.ALLOW else rt.config.router.refusal_text
        documents = tuple(
            DocRef(decision.chosen_domain, doc.doc_id, score) for doc, score in hits
        )
        return self._deliver(
            query_id, query_text, session_id, persona_tag, persona,
            pattern="router", domains=(decision.chosen_domain,), documents=documents,
            body_text=body, risk=risk, trail=trail,
        )

    def run_workflow_chain(
        self,
        query_text: str,
        session_id: str,
        persona_tag: str | None = None,
        query_id: str | None = None,
    ) -> FinalResponse:
        """Fixed two-stage chain: refine the query, then answer over the
        configured default domain. No routing, no decomposition."""
        rt = self._rt
        if not query_text or not query_text.strip():
            raise EmptyQuery("query must be non-empty")
        domain = rt.config.router.chain_domain
        if not domain or domain not in self._routes:
            raise UnknownDomain("workflow chain needs a configured, registered domain")
        query_id = query_id or rt.next_query_id()
        persona_tag = persona_tag or rt.config.default_persona
        persona = rt.reasoning.persona(persona_tag)

        refine_prompt = rt.reasoning.render_template("refine-query", {"q": query_text})
        refined = rt.reasoning.complete(CompletionRequest(prompt=refine_prompt, persona=persona)).text

        hits = rt.corpora.search(self._routes[domain], refined, rt.config.retrieval_k)
        context = CONTEXT_SEPARATOR.join(doc.text for doc, _ in hits)
        answer_prompt = rt.reasoning.render_template("rag-answer", {"q": refined, "ctx": context})
        completion = rt.reasoning.complete(CompletionRequest(prompt=answer_prompt, persona=persona))
        risk = rt.guardrail.assess_risk(completion.text)
        body = completion.text if risk.verdict is Verdict.ALLOW else rt.config.router.refusal_text

        event = rt.events.append(
            EventKind.ORCHESTRATION,
            {
                "query_id": query_id,
                "pattern": "workflow-chain",
                "stages": [
                    {"stage": "refine-query", "prompt": refine_prompt, "completion": refined},
                    {
                        "stage": "rag-answer",
                        "refined_query": refined,
                        "prompt": answer_prompt,
                        "completion": completion.text,
                    },
                ],
            },
        )
        documents = tuple(DocRef(domain, doc.doc_id, score) for doc, score in hits)
        return self._deliver(
            query_id, query_text, session_id, persona_tag, persona,
            pattern="workflow-chain", domains=(domain,), documents=documents,
            body_text=body, risk=risk, trail=[event.event_seq],
        )

    def _deliver(
        self, query_id, query_text, session_id, persona_tag, persona,
        *, pattern, domains, documents, body_text, risk, trail,
    ) -> FinalResponse:
        rt = self._rt
        framed = rt.reasoning.apply_persona(body_text, persona)
        _, memory_seq = rt.remember(
            session_id, MemoryKind.INTERACTION, f"user: {query_text}\nagent: {body_text}"
        )
        return FinalResponse(
            query_id=query_id,
            text=framed,
            persona=persona_tag,
            provenance=Provenance(
                pattern=pattern,
                domains_touched=tuple(domains),
                documents=tuple(documents),
                risk=risk,
                decision_trail=tuple(trail) + (memory_seq,),
            ),
        )
