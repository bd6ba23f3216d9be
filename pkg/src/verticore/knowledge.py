"""Retrieval tools: per-domain vector stores, a triple store, web search.

Each domain tag owns its own store and index; a search never crosses
domains. Top-k is exact (exhaustive cosine over the corpus), which keeps
oracle tests meaningful at desk scale.
"""

from __future__ import annotations

import json
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass, field

from verticore.embedding import DIM, cosine, embed
from verticore.errors import BackendUnavailable, EmptyContent, EmptyField, UnknownDomain


@dataclass(frozen=True)
class Document:
    doc_id: str
    domain_tag: str
    text: str
    metadata: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class Triple:
    subject: str
    predicate: str
    object: str


@dataclass(frozen=True)
class SearchResult:
    title: str
    snippet: str
    source_url: str
    rank: int


class VectorHub:
    """One exact-search vector store per domain tag."""

    def __init__(self) -> None:
        # domain -> doc_id -> (Document, embedding); insertion order kept
        self._domains: dict[str, dict[str, tuple[Document, tuple[float, ...]]]] = {}

    def domains(self) -> list[str]:
        return list(self._domains)

    def has_domain(self, domain_tag: str) -> bool:
        return domain_tag in self._domains

    def upsert(self, domain_tag: str, document: Document) -> Document:
        """Insert or replace by (domain, doc_id); embedding recomputed."""
        if not document.text or not document.text.strip():
            raise EmptyContent("document text must be non-empty")
        stored = Document(
            doc_id=document.doc_id,
            domain_tag=domain_tag,
            text=document.text,
            metadata=dict(document.metadata),
        )
        self._domains.setdefault(domain_tag, {})[stored.doc_id] = (
            stored,
            embed(stored.text),
        )
        return stored

    def delete(self, domain_tag: str, doc_id: str) -> bool:
        store = self._domains.get(domain_tag)
        if store is None or doc_id not in store:
            return False
        del store[doc_id]
        return True

    def documents(self, domain_tag: str) -> list[Document]:
        store = self._domains.get(domain_tag)
        if store is None:
            raise UnknownDomain(f"no corpus for domain: {domain_tag}")
        return [doc for doc, _ in store.values()]

    def size(self, domain_tag: str) -> int:
        return len(self._domains.get(domain_tag, {}))

    def search(
        self, domain_tag: str, query_text: str, k: int
    ) -> list[tuple[Document, float]]:
        """Top-k of one domain by cosine, score desc, doc_id asc on ties."""
        if k < 1:
            raise ValueError("k must be >= 1")
        store = self._domains.get(domain_tag)
        if store is None:
            raise UnknownDomain(f"no corpus for domain: {domain_tag}")
        query_vec = embed(query_text)
        scored = [(doc, cosine(query_vec, vec)) for doc, vec in store.values()]
        scored.sort(key=lambda pair: (-pair[1], pair[0].doc_id))
        return scored[:k]

    def centroid(self, domain_tag: str) -> tuple[float, ...]:
        """Normalized mean of the domain's document embeddings.

        Empty domains (or all-zero corpora) yield the zero vector.
        """
        store = self._domains.get(domain_tag)
        if store is None:
            raise UnknownDomain(f"no corpus for domain: {domain_tag}")
        if not store:
            return (0.0,) * DIM
        vectors = [vec for _, vec in store.values()]
        mean = [sum(v[i] for v in vectors) / len(vectors) for i in range(DIM)]
        norm = sum(x * x for x in mean) ** 0.5
        if norm == 0.0:
            return tuple(mean)
        return tuple(x / norm for x in mean)

    def canonical_state(self) -> dict:
        return {
            domain: [
                {
                    "doc_id": doc_id,
                    "text": doc.text,
                    "metadata": dict(sorted(doc.metadata.items())),
                }
                for doc_id, (doc, _) in sorted(store.items())
            ]
            for domain, store in sorted(self._domains.items())
        }


WILDCARD = "*"


class TripleStore:
    """Deduplicated (subject, predicate, object) facts with pattern queries."""

    def __init__(self) -> None:
        self._triples: set[tuple[str, str, str]] = set()

    def __len__(self) -> int:
        return len(self._triples)

    def add(self, triple: Triple) -> bool:
        """Store a triple; returns False if it was already present."""
        for name in ("subject", "predicate", "object"):
            if not getattr(triple, name):
                raise EmptyField(f"triple {name} must be non-empty")
        key = (triple.subject, triple.predicate, triple.object)
        if key in self._triples:
            return False
        self._triples.add(key)
        return True

    def query(self, subject: str, predicate: str, obj: str) -> list[Triple]:
        """All triples matching the pattern; '*' matches any value."""
        matches = [
            Triple(s, p, o)
            for (s, p, o) in self._triples
            if (subject == WILDCARD or s == subject)
            and (predicate == WILDCARD or p == predicate)
            and (obj == WILDCARD or o == obj)
        ]
        matches.sort(key=lambda t: (t.subject, t.predicate, t.object))
        return matches

    def canonical_state(self) -> list[list[str]]:
        return [list(t) for t in sorted(self._triples)]


class FixtureSearchClient:
    """Offline web search: canned results keyed by query substring.

    The first fixture key (in file order) that is a substring of the
    query wins; no match returns an empty result list.
    """

    backend_id = "search-fixture"

    def __init__(self, fixtures: dict[str, list[dict]] | None = None) -> None:
        self._fixtures: list[tuple[str, list[SearchResult]]] = []
        for key, rows in (fixtures or {}).items():
            results = [
                SearchResult(
                    title=row.get("title", ""),
                    snippet=row.get("snippet", ""),
                    source_url=row.get("source_url", ""),
                    rank=i + 1,
                )
                for i, row in enumerate(rows)
            ]
            self._fixtures.append((key, results))

    def search(self, query: str) -> list[SearchResult]:
        if not query or not query.strip():
            raise EmptyContent("search query must be non-empty")
        for key, results in self._fixtures:
            if key in query:
                return list(results)
        return []


class LiveSearchClient:
    """Single-GET client for a remote search endpoint.

    Expects a JSON array of {title, snippet, source_url} objects; ranks
    are assigned from reply order.
    """

    backend_id = "search-live"

    def __init__(self, url: str, timeout: float = 5.0) -> None:
        self._url = url
        self._timeout = timeout

    def search(self, query: str) -> list[SearchResult]:
        if not query or not query.strip():
            raise EmptyContent("search query must be non-empty")
        full = f"{self._url}?{urllib.parse.urlencode({'q': query})}"
        try:
            with urllib.request.urlopen(full, timeout=self._timeout) as reply:
                rows = json.loads(reply.read().decode("utf-8"))
        except (urllib.error.URLError, OSError, ValueError) as exc:
            raise BackendUnavailable(f"search endpoint failed: {exc}") from exc
        return [
            SearchResult(
                title=row.get("title", ""),
                snippet=row.get("snippet", ""),
                source_url=row.get("source_url", ""),
                rank=i + 1,
            )
            for i, row in enumerate(rows)
        ]


def load_corpus_lines(lines) -> list[Document]:
    """Parse JSON Lines corpus rows into documents.

    Raises ValueError naming the 1-based line number on malformed rows.
    """
    documents = []
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            row = json.loads(stripped)
            text = row["text"]
            if not isinstance(text, str) or not text.strip():
                raise KeyError("text must be a non-empty string")
            documents.append(
                Document(
                    doc_id=row["doc_id"],
                    domain_tag=row.get("domain", ""),
                    text=text,
                    metadata={str(k): str(v) for k, v in row.get("metadata", {}).items()},
                )
            )
        except (json.JSONDecodeError, KeyError, TypeError, AttributeError) as exc:
            raise ValueError(f"malformed corpus line {line_no}: {exc}") from exc
    return documents
