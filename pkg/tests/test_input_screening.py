"""Input screening is a config flag, default off."""

import json

from verticore.hitl import ReviewStatus
from verticore.skills import Verdict

RISKY_QUERY = "my card is 4111 1111 1111 1111, what now"


def ingest(runtime, domain, texts):
    lines = [
        json.dumps({"doc_id": f"{domain}-{i}", "domain": domain, "text": t})
        for i, t in enumerate(texts)
    ]
    runtime.ingest_documents(domain, lines)


def test_default_off_router_processes_risky_input(make_runtime):
    runtime = make_runtime(use_fixtures=False)
    ingest(runtime, "kb", ["card replacement guide without numbers"])
    response = runtime.router.answer_routed(RISKY_QUERY, "s", "casual")
    assert response.provenance.documents  # retrieval ran


def test_router_screen_refuses_before_retrieval(make_runtime):
    runtime = make_runtime(use_fixtures=False, overrides={"guardrail": {"screen_inputs": True}})
    ingest(runtime, "kb", ["card replacement guide without numbers"])
    response = runtime.router.answer_routed(RISKY_QUERY, "s", "casual")
    assert response.provenance.documents == ()
    assert response.provenance.risk.verdict is Verdict.BLOCK
    assert runtime.config.router.refusal_text in response.text


def test_orchestrator_screen_short_circuits(make_runtime):
    runtime = make_runtime(use_fixtures=False, overrides={"guardrail": {"screen_inputs": True}})
    ingest(runtime, "kb", ["notes"])
    response = runtime.orchestrator.run_orchestrated(RISKY_QUERY, "s", "casual")
    assert runtime.config.router.refusal_text in response.text
    assert response.provenance.documents == ()


def test_hitl_screen_keeps_item_reviewable(make_runtime):
    runtime = make_runtime(use_fixtures=False, overrides={"guardrail": {"screen_inputs": True}})
    ingest(runtime, "kb", ["notes"])
    item = runtime.hitl.submit_for_review(RISKY_QUERY, "s", "kb")
    assert item.status is ReviewStatus.PENDING
    assert item.risk.verdict is Verdict.BLOCK
    assert item.draft == runtime.config.router.refusal_text
    decided = runtime.hitl.decide(item.review_id, ReviewStatus.REJECTED, "unsafe input")
    assert decided.status is ReviewStatus.REJECTED
