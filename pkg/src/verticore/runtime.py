"""Composition root: wires stores, agents, and the event log together.

Every mutation flows through here so it lands in the event log exactly
once; `replay` folds a closed log back into the same state and the two
are compared by a canonical digest.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from pathlib import Path

from verticore.config import Config
from verticore.errors import EmptyField
from verticore.events import EventKind, EventLog, canonical_json, read_events
from verticore.hitl import HitlAgent, ReviewRegistry, ReviewStatus, item_from_payload
from verticore.knowledge import (
    Document,
    FixtureSearchClient,
    LiveSearchClient,
    TripleStore,
    Triple,
    VectorHub,
    load_corpus_lines,
)
from verticore.memory import MemoryKind, MemoryStore, record_from_payload
from verticore.orchestrator import OrchestratorAgent
from verticore.reasoning import (
    CapabilityLexicon,
    PromptTemplate,
    ReasoningEngine,
    RemoteBackend,
    Rule,
    ScriptedBackend,
    TemplateRegistry,
    build_personas,
)
from verticore.router import FinalResponse, RouterAgent
from verticore.skills import Guardrail, build_registry

DEFAULT_TEMPLATES = {
    "rag-answer": (
        "Answer the question using only the context provided.\n"
        "Question: {q}\nContext:\n{ctx}"
    ),
    "refine-query": "Rewrite the request as a crisp retrieval query.\nRequest: {q}",
    "synthesize": (
        "Question: {q}\nCompose one cohesive answer from the findings.\nFindings:\n{parts}"
    ),
    "hitl-draft": (
        "Draft a response for expert review.\nQuestion: {q}\n"
        "Prior expert guidance:\n{feedback}\nContext:\n{ctx}"
    ),
    "agent-task": "Subtask: {task}\nEvidence:\n{ctx}",
    "decompose": (
        "List the independent subtasks of this request as a JSON array of strings.\n"
        "Request: {q}"
    ),
}


@dataclass
class QueryRecord:
    query_id: str
    session_id: str
    pattern: str
    persona: str
    status: str  # delivered | pending-review
    review_id: str | None = None
    response: dict | None = None

    def to_payload(self) -> dict:
        return {
            "query_id": self.query_id,
            "session_id": self.session_id,
            "pattern": self.pattern,
            "persona": self.persona,
            "status": self.status,
            "review_id": self.review_id,
            "response": self.response,
        }


def _load_json(path: Path | None, default):
    if path is None:
        return default
    return json.loads(Path(path).read_text(encoding="utf-8"))


class Runtime:
    def __init__(self, config: Config, events: EventLog) -> None:
        self.config = config
        self.events = events
        self.memory = MemoryStore()
        self.corpora = VectorHub()
        self.kg = TripleStore()
        self.queries: dict[str, QueryRecord] = {}

        toxicity = _load_json(config.paths.toxicity_lexicon, [])
        self.guardrail = Guardrail(
            lexicon=tuple(toxicity), threshold=config.guardrail.threshold
        )
        self.skills = build_registry(self.guardrail)

        templates = TemplateRegistry()
        bodies = dict(DEFAULT_TEMPLATES)
        if config.paths.templates_dir is not None:
            for path in sorted(Path(config.paths.templates_dir).glob("*.txt")):
                bodies[path.stem] = path.read_text(encoding="utf-8").rstrip("\n")
        for template_id, body in bodies.items():
            templates.register(PromptTemplate(template_id=template_id, body=body))

        rules = [
            Rule(pattern=row["pattern"], completion=row["completion"])
            for row in _load_json(config.paths.rule_table, [])
        ]
        if config.backend.mode == "remote":
            backend = RemoteBackend(
                url=config.backend.url,
                model=config.backend.model,
                max_retries=config.backend.max_retries,
                timeout=config.backend.timeout,
            )
        else:
            backend = ScriptedBackend(rules)
        lexicon = CapabilityLexicon(_load_json(config.paths.capability_lexicon, {}))
        self.reasoning = ReasoningEngine(
            templates=templates,
            backend=backend,
            personas=build_personas(config.personas),
            lexicon=lexicon,
            decompose_remotely=config.backend.mode == "remote",
        )

        if config.backend.search_url:
            self.web_search = LiveSearchClient(config.backend.search_url)
        else:
            self.web_search = FixtureSearchClient(
                _load_json(config.paths.search_fixtures, {})
            )

        self.router = RouterAgent(self)
        self.orchestrator = OrchestratorAgent(self)
        self.hitl = HitlAgent(self)

        self._memory_lock = threading.Lock()
        self._id_lock = threading.Lock()
        self._query_count = 0
        self._review_count = 0

    # -- construction ---------------------------------------------------

    @classmethod
    def from_config(cls, config: Config) -> "Runtime":
        events = EventLog(
            config.paths.event_log,
            seed=config.seed,
            deterministic=config.service.deterministic,
        )
        runtime = cls(config, events)
        for record in events.records():
            runtime._resume_event(record)
        events.append(EventKind.CONFIG_LOADED, config.summary())
        runtime._load_seed_data()
        return runtime

    def _resume_event(self, record) -> None:
        """Rebuild live state from one event of a pre-existing log."""
        _fold_event(
            record,
            self.memory,
            self.corpora,
            self.kg,
            self._resume_route,
            self.hitl.registry,
            self.queries,
        )
        payload = record.payload
        if record.kind is EventKind.REVIEW_CREATED:
            self._review_count = max(self._review_count, _id_number(payload["review_id"]))
        if "query_id" in payload:
            self._query_count = max(self._query_count, _id_number(payload["query_id"]))

    def _resume_route(self, domain: str) -> None:
        if not self.router.has_route(domain):
            self.router.register_domain(domain)

    def _load_seed_data(self) -> None:
        corpus_dir = self.config.paths.corpus_dir
        if corpus_dir is not None:
            for path in sorted(Path(corpus_dir).glob("*.jsonl")):
                lines = path.read_text(encoding="utf-8").splitlines()
                self.ingest_documents(path.stem, lines)
        kg_seed = self.config.paths.kg_seed
        if kg_seed is not None:
            for line in Path(kg_seed).read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                row = json.loads(line)
                self.kg_add(Triple(row["subject"], row["predicate"], row["object"]))

    def close(self) -> None:
        self.events.close()

    # -- id allocation ---------------------------------------------------

    def next_query_id(self) -> str:
        with self._id_lock:
            self._query_count += 1
            return f"q-{self._query_count:08d}"

    def next_review_id(self) -> str:
        with self._id_lock:
            self._review_count += 1
            return f"rev-{self._review_count:08d}"

    # -- logged mutations --------------------------------------------------

    def remember(self, session_id: str, kind: MemoryKind, content: str):
        """Append to memory and log the record; returns (record, event_seq)."""
        with self._memory_lock:
            record = self.memory.append(session_id, kind, content)
            event = self.events.append(EventKind.MEMORY_APPEND, record.to_payload())
            return record, event.event_seq

    def ingest_documents(self, domain_tag: str, lines) -> int:
        """Upsert a JSON Lines corpus into one domain and route it."""
        documents = load_corpus_lines(lines)
        for document in documents:
            stored = self.corpora.upsert(domain_tag, document)
            self.events.append(
                EventKind.DOC_UPSERT,
                {
                    "domain": domain_tag,
                    "doc_id": stored.doc_id,
                    "text": stored.text,
                    "metadata": stored.metadata,
                },
            )
        if documents and not self.router.has_route(domain_tag):
            self.router.register_domain(domain_tag)
        return len(documents)

    def delete_document(self, domain_tag: str, doc_id: str) -> bool:
        removed = self.corpora.delete(domain_tag, doc_id)
        if removed:
            self.events.append(
                EventKind.DOC_DELETE, {"domain": domain_tag, "doc_id": doc_id}
            )
        return removed

    def kg_add(self, triple: Triple) -> bool:
        added = self.kg.add(triple)
        if added:
            self.events.append(
                EventKind.KG_ADD,
                {
                    "subject": triple.subject,
                    "predicate": triple.predicate,
                    "object": triple.object,
                },
            )
        return added

    def register_pending_query(self, item) -> None:
        self.queries[item.query_id] = QueryRecord(
            query_id=item.query_id,
            session_id=item.session_id,
            pattern="hitl",
            persona=item.persona,
            status="pending-review",
            review_id=item.review_id,
        )

    def deliver_response(self, response: FinalResponse, session_id: str) -> QueryRecord:
        """Record delivery; the event payload is exactly the wire body."""
        payload = {
            "query_id": response.query_id,
            "session_id": session_id,
            "response": response.to_payload(),
        }
        self.events.append(EventKind.RESPONSE_DELIVERED, payload)
        existing = self.queries.get(response.query_id)
        record = QueryRecord(
            query_id=response.query_id,
            session_id=session_id,
            pattern=response.provenance.pattern,
            persona=response.persona,
            status="delivered",
            review_id=existing.review_id if existing else None,
            response=response.to_payload(),
        )
        self.queries[response.query_id] = record
        return record

    # -- digest -----------------------------------------------------------

    def state_digest(self) -> str:
        return digest_state(
            self.memory,
            self.corpora,
            self.kg,
            self.router.registered_domains(),
            self.hitl.registry,
            self.queries,
        )


def digest_state(
    memory: MemoryStore,
    corpora: VectorHub,
    kg: TripleStore,
    routes,
    reviews: ReviewRegistry,
    queries: dict[str, QueryRecord],
) -> str:
    state = {
        "memory": memory.canonical_state(),
        "corpora": corpora.canonical_state(),
        "kg": kg.canonical_state(),
        "routes": sorted(routes),
        "reviews": reviews.canonical_state(),
        "queries": {qid: queries[qid].to_payload() for qid in sorted(queries)},
    }
    return hashlib.sha256(canonical_json(state).encode("utf-8")).hexdigest()


@dataclass
class ReplayedState:
    memory: MemoryStore
    corpora: VectorHub
    kg: TripleStore
    routes: list[str]
    reviews: ReviewRegistry
    queries: dict[str, QueryRecord]
    event_count: int

    def digest(self) -> str:
        return digest_state(
            self.memory, self.corpora, self.kg, self.routes, self.reviews, self.queries
        )


def _id_number(identifier: str) -> int:
    try:
        return int(identifier.rsplit("-", 1)[-1])
    except ValueError:
        return 0


def _fold_event(
    record,
    memory: MemoryStore,
    corpora: VectorHub,
    kg: TripleStore,
    register_route,
    reviews: ReviewRegistry,
    queries: dict[str, QueryRecord],
) -> None:
    """Apply one event to the given stores; shared by replay and restart."""
    payload = record.payload
    if record.kind is EventKind.MEMORY_APPEND:
        memory.apply(record_from_payload(payload))
    elif record.kind is EventKind.DOC_UPSERT:
        corpora.upsert(
            payload["domain"],
            Document(
                doc_id=payload["doc_id"],
                domain_tag=payload["domain"],
                text=payload["text"],
                metadata=dict(payload["metadata"]),
            ),
        )
        register_route(payload["domain"])
    elif record.kind is EventKind.DOC_DELETE:
        corpora.delete(payload["domain"], payload["doc_id"])
    elif record.kind is EventKind.KG_ADD:
        if not all(payload.get(k) for k in ("subject", "predicate", "object")):
            raise EmptyField("kg-add event with empty field")
        kg.add(Triple(payload["subject"], payload["predicate"], payload["object"]))
    elif record.kind is EventKind.REVIEW_CREATED:
        reviews.add(item_from_payload(payload))
        queries[payload["query_id"]] = QueryRecord(
            query_id=payload["query_id"],
            session_id=payload["session_id"],
            pattern="hitl",
            persona=payload["persona"],
            status="pending-review",
            review_id=payload["review_id"],
        )
    elif record.kind is EventKind.REVIEW_DECIDED:
        reviews.apply_decision(
            payload["review_id"],
            ReviewStatus(payload["status"]),
            payload["note"],
            payload["replacement_text"],
            record.event_seq,
        )
    elif record.kind is EventKind.RESPONSE_DELIVERED:
        response = payload["response"]
        existing = queries.get(payload["query_id"])
        queries[payload["query_id"]] = QueryRecord(
            query_id=payload["query_id"],
            session_id=payload["session_id"],
            pattern=response["provenance"]["pattern"],
            persona=response["persona"],
            status="delivered",
            review_id=existing.review_id if existing else None,
            response=response,
        )
    # routing-decision, orchestration, config-loaded: audit only


def replay(log_path: str | Path) -> ReplayedState:
    """Fold a closed event log back into full system state.

    Raises CorruptLog on the first sequence gap or payload-hash mismatch.
    """
    memory = MemoryStore()
    corpora = VectorHub()
    kg = TripleStore()
    routes: list[str] = []
    reviews = ReviewRegistry()
    queries: dict[str, QueryRecord] = {}
    count = 0

    def register_route(domain: str) -> None:
        if domain not in routes:
            routes.append(domain)

    for record in read_events(Path(log_path)):
        count = record.event_seq
        _fold_event(record, memory, corpora, kg, register_route, reviews, queries)
    return ReplayedState(
        memory=memory,
        corpora=corpora,
        kg=kg,
        routes=routes,
        reviews=reviews,
        queries=queries,
        event_count=count,
    )
