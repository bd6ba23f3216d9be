"""Service endpoints: the behavioral contract behind the HTTP API.

ServiceCore implements every endpoint as a plain method so the CLI's
in-process mode and the HTTP layer share one code path. The HTTP adapter
in http_api.py only parses requests and maps ApiError to status codes.
"""

from __future__ import annotations

from verticore.errors import (
    AlreadyDecided,
    BackendUnavailable,
    EmptyContent,
    EmptyQuery,
    MissingReplacement,
    NoConfidentRoute,
    NoDomains,
    StillPending,
    UnexpectedReplacement,
    UnknownDomain,
    UnknownReview,
    VerticoreError,
)
from verticore.hitl import ReviewStatus
from verticore.runtime import Runtime

PATTERNS = ("router", "orchestrated", "workflow-chain", "hitl")
PERSONA_TAGS = ("empathetic", "professional", "casual")


class ApiError(Exception):
    def __init__(self, status: int, error: str, detail: str = "", **extra):
        super().__init__(detail or error)
        self.status = status
        self.body = {"error": error, "detail": detail or error}
        self.body.update(extra)


def _translate(exc: VerticoreError) -> ApiError:
    name = type(exc).__name__
    if isinstance(exc, (UnknownReview,)):
        return ApiError(404, name, str(exc))
    if isinstance(exc, AlreadyDecided):
        return ApiError(409, name, str(exc))
    if isinstance(exc, BackendUnavailable):
        return ApiError(502, name, str(exc))
    if isinstance(exc, NoConfidentRoute):
        return ApiError(
            422, name, str(exc), alternatives=[[t, s] for t, s in exc.alternatives]
        )
    if isinstance(
        exc,
        (
            EmptyQuery,
            EmptyContent,
            UnknownDomain,
            NoDomains,
            MissingReplacement,
            UnexpectedReplacement,
            StillPending,
        ),
    ):
        return ApiError(422, name, str(exc))
    return ApiError(400, name, str(exc))


class ServiceCore:
    def __init__(self, runtime: Runtime) -> None:
        self.runtime = runtime

    def health(self) -> dict:
        return {"status": "ok", "event_seq": self.runtime.events.last_seq}

    def submit_query(self, body: dict) -> dict:
        if not isinstance(body, dict):
            raise ApiError(400, "MalformedBody", "request body must be a JSON object")
        session_id = body.get("session_id")
        text = body.get("text")
        pattern = body.get("pattern")
        if not isinstance(session_id, str) or not session_id:
            raise ApiError(400, "MalformedBody", "session_id is required")
        if not isinstance(text, str):
            raise ApiError(400, "MalformedBody", "text is required")
        if pattern not in PATTERNS:
            raise ApiError(400, "UnknownPattern", f"pattern must be one of {PATTERNS}")
        persona = body.get("persona", self.runtime.config.default_persona)
        if persona not in PERSONA_TAGS:
            raise ApiError(400, "UnknownPersona", f"persona must be one of {PERSONA_TAGS}")
        domain = body.get("domain")

        rt = self.runtime
        try:
            if pattern == "hitl":
                if not isinstance(domain, str) or not domain:
                    raise ApiError(422, "MissingDomain", "hitl queries need a domain")
                item = rt.hitl.submit_for_review(text, session_id, domain, persona)
                return {
                    "query_id": item.query_id,
                    "status": "pending-review",
                    "review_id": item.review_id,
                }
            if pattern == "router":
                response = rt.router.answer_routed(text, session_id, persona)
            elif pattern == "workflow-chain":
                response = rt.router.run_workflow_chain(text, session_id, persona)
            else:
                response = rt.orchestrator.run_orchestrated(text, session_id, persona)
        except VerticoreError as exc:
            raise _translate(exc) from exc
        record = rt.deliver_response(response, session_id)
        return {
            "query_id": record.query_id,
            "status": "delivered",
            "response": record.response,
        }

    def get_query(self, query_id: str) -> dict:
        record = self.runtime.queries.get(query_id)
        if record is None:
            raise ApiError(404, "UnknownQuery", f"no query: {query_id}")
        return record.to_payload()

    def list_reviews(self, status: str | None = None) -> list[dict]:
        registry = self.runtime.hitl.registry
        if status is None:
            items = registry.items()
        else:
            try:
                wanted = ReviewStatus(status)
            except ValueError:
                raise ApiError(400, "UnknownStatus", f"no review status {status!r}") from None
            items = [item for item in registry.items() if item.status is wanted]
        return [item.summary() for item in items]

    def get_review(self, review_id: str) -> dict:
        try:
            return self.runtime.hitl.registry.get(review_id).to_payload()
        except UnknownReview as exc:
            raise _translate(exc) from exc

    def post_decision(self, review_id: str, body: dict) -> dict:
        if not isinstance(body, dict) or "status" not in body:
            raise ApiError(400, "MalformedBody", "decision body needs a status field")
        try:
            status = ReviewStatus(body["status"])
            if status is ReviewStatus.PENDING:
                raise ValueError("pending is not a decision")
        except ValueError:
            raise ApiError(
                422, "InvalidStatus", "status must be approved, rejected, or modified"
            ) from None
        note = body.get("note")
        replacement = body.get("replacement_text")
        rt = self.runtime
        try:
            item = rt.hitl.decide(review_id, status, note, replacement)
            response = rt.hitl.finalize(review_id)
        except VerticoreError as exc:
            raise _translate(exc) from exc
        rt.deliver_response(response, item.session_id)
        return item.to_payload()

    def ingest_corpus(self, domain: str, text_body: str) -> dict:
        if not domain:
            raise ApiError(400, "MalformedBody", "domain is required")
        try:
            count = self.runtime.ingest_documents(domain, text_body.splitlines())
        except ValueError as exc:
            raise ApiError(400, "MalformedCorpus", str(exc)) from exc
        except VerticoreError as exc:
            raise _translate(exc) from exc
        return {"upserted": count}
