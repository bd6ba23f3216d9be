"""Acceptance gate: one test per release criterion, at stated tolerances.

Run with `pytest tests/test_acceptance.py -v` to get one pass/fail line
per criterion; each test also prints an ACCEPTANCE line on success
(visible with -s).
"""

import json
import random
import threading
import time

import pytest

from verticore.config import load_config
from verticore.embedding import embed
from verticore.events import EventKind
from verticore.hitl import ReviewStatus
from verticore.memory import MemoryKind
from verticore.runtime import Runtime, replay
from verticore.scenarios import ScenarioRunner, format_table
from verticore.service import ServiceCore
from verticore.skills import Guardrail, Verdict, risk_score

from conftest import FIXTURES, write_config
from oracles import top_k_oracle

IP_LAW_QUERY = "Summarize recent IP law precedents in technology"
USE_CASE_ONE = "insights on financial performance, customer feedback, and market trends"
LEGAL_CASE = "recent legal precedents, statutory laws, and financial implications of a patent dispute"

SCENARIO_NAMES = sorted(p.stem for p in (FIXTURES / "scenarios").glob("*.json"))


def build_runtime(tmp_path, subdir, **kwargs):
    workdir = tmp_path / subdir
    workdir.mkdir(parents=True, exist_ok=True)
    return Runtime.from_config(load_config(write_config(workdir, **kwargs)))


@pytest.fixture(scope="module")
def suite_runs(tmp_path_factory):
    """Two identical full scenario-suite runs plus their logs and events."""
    base = tmp_path_factory.mktemp("suite")
    runs = []
    for name in ("run1", "run2"):
        runtime = build_runtime(base, name)
        runner = ScenarioRunner(ServiceCore(runtime))
        for scenario in SCENARIO_NAMES:
            passed, rows, digest = runner.run_file(FIXTURES / "scenarios" / f"{scenario}.json")
            assert passed, format_table(scenario, rows, passed, digest)
        runs.append(
            {
                "digest": runtime.state_digest(),
                "log_path": runtime.config.paths.event_log,
                "events": runtime.events.records(),
            }
        )
        runtime.close()
    return runs


def test_criterion_1_routing_fidelity(tmp_path):
    runtime = build_runtime(tmp_path, "routing", use_fixtures=False)
    for domain in ("legal", "financial"):
        lines = (FIXTURES / "corpora" / f"{domain}.jsonl").read_text().splitlines()
        count = runtime.ingest_documents(domain, lines)
        assert count >= 5
    started = time.perf_counter()
    for _ in range(100):
        response = runtime.router.answer_routed(IP_LAW_QUERY, "accept-1", "professional")
        assert response.provenance.domains_touched == ("legal",)
    elapsed = time.perf_counter() - started
    runtime.close()
    assert elapsed < 1.0, f"100 routed runs took {elapsed:.3f}s"
    print(f"\nACCEPTANCE 1 PASS: IP-law query routed to legal 100/100 in {elapsed:.3f}s")


def test_criterion_2_decomposition_fidelity(tmp_path):
    plans = []
    for attempt in ("a", "b"):
        runtime = build_runtime(tmp_path, f"decomp-{attempt}")
        use_case = runtime.orchestrator.plan(USE_CASE_ONE)
        assert len(use_case) == 3
        capabilities = [s.capability for s in use_case]
        assert len(set(capabilities)) == 3
        legal = runtime.orchestrator.plan(LEGAL_CASE)
        assert len(legal) == 3
        plans.append(
            [
                (s.index, s.description, s.capability.value, s.target_domain)
                for s in use_case + legal
            ]
        )
        runtime.close()
    assert plans[0] == plans[1]
    print("\nACCEPTANCE 2 PASS: 3 subtasks / 3 distinct capabilities, deterministic")


def test_criterion_3_retrieval_oracle_equivalence(tmp_path):
    runtime = build_runtime(tmp_path, "retrieval", use_fixtures=False)
    rng = random.Random(2024)
    vocabulary = (
        "ledger audit carrier invoice clinic payment patent verdict stock "
        "warehouse onboarding churn liquidity margin shipment refund therapy"
    ).split()

    def random_text():
        return " ".join(rng.choice(vocabulary) for _ in range(rng.randint(2, 9)))

    started = time.perf_counter()
    for domain in ("alpha", "beta"):
        lines = [
            json.dumps({"doc_id": f"{domain}-{i:03d}", "domain": domain, "text": random_text()})
            for i in range(200)
        ]
        runtime.ingest_documents(domain, lines)
        rows = [(d.doc_id, embed(d.text)) for d in runtime.corpora.documents(domain)]
        for _ in range(50):
            query = random_text()
            query_vec = embed(query)
            for k in (1, 3, 10):
                expected = top_k_oracle(query_vec, rows, k)
                actual = [(d.doc_id, s) for d, s in runtime.corpora.search(domain, query, k)]
                assert actual == expected
    elapsed = time.perf_counter() - started
    runtime.close()
    assert elapsed < 10.0, f"oracle equivalence took {elapsed:.3f}s"
    print(f"\nACCEPTANCE 3 PASS: top-k equals brute-force oracle, {elapsed:.2f}s")


def test_criterion_4_guardrail_properties(suite_runs):
    lexicon = tuple(json.loads((FIXTURES / "lexicons" / "toxicity.json").read_text()))
    guardrail = Guardrail(lexicon=lexicon)
    rng = random.Random(404)
    vocabulary = [
        "fine", "report", "scam", "bogus", "worthless", "a@b.co", "x@y.example.net",
        "123-45-6789", "4111111111111111", "4111 1111 1111 1111", "hello", "v1.2",
    ]

    def random_text():
        return " ".join(rng.choice(vocabulary) for _ in range(rng.randint(0, 15)))

    for _ in range(1000):
        assessment = guardrail.assess_risk(random_text())
        assert assessment.score == risk_score(assessment.toxicity_count, assessment.pii_count)
        expected = Verdict.BLOCK if assessment.score >= guardrail.threshold else Verdict.ALLOW
        assert assessment.verdict is expected

    for _ in range(1000):
        base = random_text()
        suffix = rng.choice((" ", "\n")) + random_text()
        before = guardrail.assess_risk(base)
        after = guardrail.assess_risk(base + suffix)
        assert after.toxicity_count >= before.toxicity_count
        assert after.pii_count >= before.pii_count
        assert after.score >= before.score

    delivered = [
        e for e in suite_runs[0]["events"] if e.kind is EventKind.RESPONSE_DELIVERED
    ]
    assert delivered, "scenario suite delivered no responses"
    for event in delivered:
        verdict = event.payload["response"]["provenance"]["risk"]["verdict"]
        assert verdict == "allow"
    print(
        f"\nACCEPTANCE 4 PASS: formula exact x1000, monotone x1000, "
        f"{len(delivered)} delivered responses all verdict=allow"
    )


def test_criterion_5_hitl_lifecycle_safety(tmp_path):
    # retrieval_k=1 plus one unique document per case makes every draft
    # unique, so "rejected draft text never delivered" is well-posed.
    runtime = build_runtime(tmp_path, "hitl", use_fixtures=False, overrides={"retrieval_k": 1})
    case_texts = [f"case file {i}: particulars alpha-{i} beta-{i}" for i in range(700)]
    lines = [
        json.dumps({"doc_id": f"case-{i:03d}", "domain": "cases", "text": text})
        for i, text in enumerate(case_texts)
    ]
    runtime.ingest_documents("cases", lines)
    rng = random.Random(5005)
    pending: list[str] = []
    terminal: dict[str, ReviewStatus] = {}
    drafts: dict[str, str] = {}
    delivered_payloads: list[str] = []
    submissions = 0

    for _ in range(520):
        op = rng.choice(("submit", "decide", "finalize"))
        if op == "submit" or (not pending and not terminal):
            item = runtime.hitl.submit_for_review(case_texts[submissions], "safety", "cases")
            submissions += 1
            pending.append(item.review_id)
            drafts[item.review_id] = item.draft
        elif op == "decide" and pending:
            review_id = pending.pop(rng.randrange(len(pending)))
            status = rng.choice(
                (ReviewStatus.APPROVED, ReviewStatus.REJECTED, ReviewStatus.MODIFIED)
            )
            replacement = f"replacement for {review_id}" if status is ReviewStatus.MODIFIED else None
            runtime.hitl.decide(review_id, status, None, replacement)
            terminal[review_id] = status
        else:
            if pending and rng.random() < 0.5:
                from verticore.errors import StillPending

                with pytest.raises(StillPending):
                    runtime.hitl.finalize(rng.choice(pending))
            elif terminal:
                review_id = rng.choice(list(terminal))
                response = runtime.hitl.finalize(review_id)
                delivered_payloads.append(response.text)
                if terminal[review_id] is ReviewStatus.REJECTED:
                    assert drafts[review_id] not in response.text

    for text in delivered_payloads:
        for review_id, status in terminal.items():
            if status is ReviewStatus.REJECTED:
                assert drafts[review_id] not in text
    feedback = [r for r in runtime.memory.records() if r.kind is MemoryKind.FEEDBACK]
    assert len(feedback) == len(terminal)
    by_review = [line for r in feedback for line in r.content.splitlines() if line.startswith("review=")]
    assert sorted(by_review) == sorted(f"review={rid}" for rid in terminal)

    assert len(drafts) == len(set(drafts.values())), "case drafts must be unique"

    races = 0
    for trial in range(100):
        item = runtime.hitl.submit_for_review(f"race case {trial}", "race", "cases")
        barrier = threading.Barrier(2)
        outcomes: list[str] = []

        def caller(status):
            barrier.wait()
            try:
                runtime.hitl.decide(item.review_id, status)
                outcomes.append("success")
            except Exception as exc:
                outcomes.append(type(exc).__name__)

        threads = [
            threading.Thread(target=caller, args=(ReviewStatus.APPROVED,)),
            threading.Thread(target=caller, args=(ReviewStatus.REJECTED,)),
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert sorted(outcomes) == ["AlreadyDecided", "success"]
        races += 1
    runtime.close()
    print(
        f"\nACCEPTANCE 5 PASS: 520 interleavings safe, {len(terminal)} terminal items "
        f"with exactly one feedback each, race clean {races}/100"
    )


def test_criterion_6_feedback_loop(tmp_path):
    runtime = build_runtime(tmp_path, "feedback")
    rng = random.Random(6006)
    adjectives = ("zoning", "billing", "clinical", "contract", "refund", "audit", "shipment", "retention")
    nouns = ("variance", "dispute", "referral", "clause", "override", "evidence", "damage", "notice")
    topics = rng.sample([f"{a} {n}" for a in adjectives for n in nouns], 50)
    hits = 0
    for case, topic in enumerate(topics):
        query = f"case {case}: how should we phrase the {topic} letter number {rng.randint(100, 999)}"
        first = runtime.hitl.submit_for_review(query, "loop", "healthcare")
        replacement = f"approved wording {case}-{rng.randint(1000, 9999)}"
        runtime.hitl.decide(first.review_id, ReviewStatus.MODIFIED, "use this", replacement)
        second = runtime.hitl.submit_for_review(query, "loop", "healthcare")
        created_event = runtime.events.records()[second.created_seq - 1]
        assert created_event.kind is EventKind.REVIEW_CREATED
        assert created_event.payload["review_id"] == second.review_id
        prompt = created_event.payload["rendered_prompt"]
        assert replacement in prompt, f"case {case}: replacement not recalled into prompt"
        hits += 1
    runtime.close()
    assert hits == 50
    print("\nACCEPTANCE 6 PASS: replacement text recalled into repeat drafts 50/50")


def test_criterion_7_determinism_and_replay(suite_runs):
    log_one = suite_runs[0]["log_path"].read_bytes()
    log_two = suite_runs[1]["log_path"].read_bytes()
    assert log_one == log_two, "scenario-suite event logs differ between identical runs"
    for run in suite_runs:
        assert replay(run["log_path"]).digest() == run["digest"]
    print(
        f"\nACCEPTANCE 7 PASS: byte-identical logs ({len(log_one)} bytes), "
        "replay digest equals live digest for both runs"
    )


def test_criterion_8_schedule_independence(tmp_path):
    runtime = build_runtime(tmp_path, "schedule")
    query = (
        "inventory levels, supplier performance, shipment tracking, "
        "portfolio performance, and customer feedback"
    )
    rng = random.Random(808)
    texts = set()
    records = set()
    for _ in range(100):
        def stagger(subtask):
            time.sleep(rng.random() * 0.004)

        runtime.orchestrator.stagger = stagger
        response = runtime.orchestrator.run_orchestrated(query, "sched", "professional")
        event = runtime.events.find(EventKind.ORCHESTRATION, query_id=response.query_id)[0]
        record = event.payload["record"]
        assert len(record["plan"]) == 5
        texts.add(response.text)
        records.add(json.dumps(record, sort_keys=True))
    runtime.orchestrator.stagger = None
    runtime.close()
    assert len(texts) == 1, f"{len(texts)} distinct synthesized texts across schedules"
    assert len(records) == 1, f"{len(records)} distinct orchestration records across schedules"
    print("\nACCEPTANCE 8 PASS: 100 randomized schedules, one text, one record")
