import json
import random
import time

import pytest

from verticore.errors import EmptyQuery
from verticore.events import EventKind
from verticore.orchestrator import AGENT_NAMES, Capability, Subtask
from verticore.skills import Verdict

USE_CASE_ONE = "insights on financial performance, customer feedback, and market trends"
LEGAL_CASE = "recent legal precedents, statutory laws, and financial implications of a patent dispute"


def ingest(runtime, domain, texts):
    lines = [
        json.dumps({"doc_id": f"{domain}-{i}", "domain": domain, "text": text})
        for i, text in enumerate(texts)
    ]
    runtime.ingest_documents(domain, lines)


# -- plan ----------------------------------------------------------------------


def test_use_case_one_plans_three_distinct_subtasks(runtime):
    plan = runtime.orchestrator.plan(USE_CASE_ONE)
    assert len(plan) == 3
    assert len({s.description for s in plan}) == 3
    assert [s.index for s in plan] == [0, 1, 2]
    assert [s.capability for s in plan] == [
        Capability.VECTOR_SEARCH,
        Capability.KNOWLEDGE_GRAPH,
        Capability.WEB_SEARCH,
    ]
    assert plan[0].target_domain == "financial"


def test_legal_case_plans_three_subtasks(runtime):
    plan = runtime.orchestrator.plan(LEGAL_CASE)
    assert len(plan) == 3
    assert plan[0].target_domain == "legal"
    assert plan[1].capability is Capability.KNOWLEDGE_GRAPH
    assert plan[2].target_domain == "financial"


def test_single_clause_query_plans_one_subtask(runtime):
    plan = runtime.orchestrator.plan("inventory levels")
    assert len(plan) == 1 and plan[0].index == 0


def test_plan_rejects_empty_query(runtime):
    with pytest.raises(EmptyQuery):
        runtime.orchestrator.plan(" ")


def test_lexicon_fixture_forces_web_search(runtime):
    plan = runtime.orchestrator.plan("market trends")
    assert plan[0].capability is Capability.WEB_SEARCH
    assert plan[0].target_domain is None


# -- dispatch -------------------------------------------------------------------


def test_single_vector_subtask_carries_document_provenance(make_runtime):
    runtime = make_runtime(use_fixtures=False)
    ingest(runtime, "d", ["the only document"])
    plan = [Subtask(0, "the only document", Capability.VECTOR_SEARCH, "d")]
    results = runtime.orchestrator.dispatch(plan)
    assert len(results) == 1
    refs = results[0].provenance.documents
    assert [r.doc_id for r in refs] == ["d-0"]
    assert results[0].agent_name == "agent-1-vector"


def test_results_sorted_by_index_under_random_delays(runtime):
    rng = random.Random(13)

    def stagger(subtask):
        time.sleep(rng.random() * 0.004)

    runtime.orchestrator.stagger = stagger
    plan = [
        Subtask(0, "inventory levels", Capability.VECTOR_SEARCH, "supply"),
        Subtask(1, "customer feedback", Capability.KNOWLEDGE_GRAPH),
        Subtask(2, "market trends", Capability.WEB_SEARCH),
        Subtask(3, "portfolio performance", Capability.VECTOR_SEARCH, "financial"),
        Subtask(4, "patient history", Capability.KNOWLEDGE_GRAPH),
    ]
    for _ in range(100):
        results = runtime.orchestrator.dispatch(plan)
        assert [r.subtask_index for r in results] == [0, 1, 2, 3, 4]
    runtime.orchestrator.stagger = None


def test_web_search_miss_degrades_to_failure_marker(runtime):
    plan = [Subtask(0, "no fixture matches this", Capability.WEB_SEARCH)]
    results = runtime.orchestrator.dispatch(plan)
    assert results[0].content == runtime.config.orchestrator.failure_marker
    assert results[0].provenance.documents == ()
    assert results[0].provenance.results == ()


def test_unknown_domain_degrades_not_raises(runtime):
    plan = [
        Subtask(0, "whatever", Capability.VECTOR_SEARCH, "ghost-domain"),
        Subtask(1, "market trends", Capability.WEB_SEARCH),
    ]
    results = runtime.orchestrator.dispatch(plan)
    assert len(results) == 2
    assert results[0].content == runtime.config.orchestrator.failure_marker
    assert results[1].content != runtime.config.orchestrator.failure_marker


def test_kg_lookup_matches_description_tokens(runtime):
    plan = [Subtask(0, "customer feedback", Capability.KNOWLEDGE_GRAPH)]
    results = runtime.orchestrator.dispatch(plan)
    triples = results[0].provenance.triples
    assert len(triples) == 2
    assert all(t.subject == "customer feedback" for t in triples)


def test_agent_names_match_capabilities(runtime):
    plan = runtime.orchestrator.plan(USE_CASE_ONE)
    results = runtime.orchestrator.dispatch(plan)
    for subtask, result in zip(plan, results):
        assert result.agent_name == AGENT_NAMES[subtask.capability]


# -- validate / synthesize -------------------------------------------------------


def test_validate_equals_assessment_of_concatenation(runtime):
    plan = runtime.orchestrator.plan(USE_CASE_ONE)
    results = runtime.orchestrator.dispatch(plan)
    assessment = runtime.orchestrator.validate(results)
    joined = "\n".join(r.content for r in sorted(results, key=lambda r: r.subtask_index))
    assert assessment == runtime.guardrail.assess_risk(joined)


def test_validate_flags_embedded_ssn(runtime):
    from verticore.orchestrator import AgentResult

    results = [
        AgentResult(0, "agent-1-vector", "clean text"),
        AgentResult(1, "agent-2-kg", "ssn 123-45-6789 leaked"),
    ]
    assessment = runtime.orchestrator.validate(results)
    assert assessment.pii_count >= 1
    assert assessment.score >= 0.5
    assert assessment.verdict is Verdict.BLOCK


def test_blocked_assessment_short_circuits_synthesis(runtime):
    from verticore.orchestrator import AgentResult

    results = [AgentResult(0, "agent-1-vector", "ssn 123-45-6789")]
    assessment = runtime.orchestrator.validate(results)
    response = runtime.orchestrator.synthesize(
        "query", results, assessment, "professional", query_id="q-x", session_id="s1"
    )
    assert runtime.config.router.refusal_text in response.text
    assert "123-45-6789" not in response.text
    assert response.provenance.risk.verdict is Verdict.BLOCK


# -- end to end -------------------------------------------------------------------


def test_enterprise_reporting_end_to_end(runtime):
    response = runtime.orchestrator.run_orchestrated(USE_CASE_ONE, "exec", "professional")
    assert response.provenance.pattern == "orchestrated"
    assert response.provenance.risk.verdict is Verdict.ALLOW
    assert "Executive report" in response.text
    events = runtime.events.find(EventKind.ORCHESTRATION, query_id=response.query_id)
    record = events[0].payload["record"]
    assert len(record["plan"]) == 3
    assert len(record["results"]) == 3
    assert record["outcome"] == "delivered"
    assert all(r["provenance"] for r in record["results"])


def test_legal_case_end_to_end(runtime):
    response = runtime.orchestrator.run_orchestrated(LEGAL_CASE, "counsel", "professional")
    events = runtime.events.find(EventKind.ORCHESTRATION, query_id=response.query_id)
    record = events[0].payload["record"]
    assert [r["agent_name"] for r in record["results"]] == [
        "agent-1-vector",
        "agent-2-kg",
        "agent-1-vector",
    ]


def test_empty_query_rejected(runtime):
    with pytest.raises(EmptyQuery):
        runtime.orchestrator.run_orchestrated("", "s", "casual")


def test_schedule_independence_of_text_and_record(runtime):
    rng = random.Random(21)
    texts = set()
    records = set()
    for _ in range(20):
        def stagger(subtask):
            time.sleep(rng.random() * 0.003)

        runtime.orchestrator.stagger = stagger
        response = runtime.orchestrator.run_orchestrated(USE_CASE_ONE, "exec", "professional")
        texts.add(response.text)
        event = runtime.events.find(EventKind.ORCHESTRATION, query_id=response.query_id)[0]
        records.add(json.dumps(event.payload["record"], sort_keys=True))
    runtime.orchestrator.stagger = None
    assert len(texts) == 1
    assert len(records) == 1


def test_domains_touched_united_across_subtasks(runtime):
    response = runtime.orchestrator.run_orchestrated(LEGAL_CASE, "counsel", "professional")
    assert response.provenance.domains_touched == ("legal", "financial")
    domains = {d.domain for d in response.provenance.documents}
    assert domains == {"legal", "financial"}
