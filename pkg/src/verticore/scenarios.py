"""Executable scenario scripts: ordered ingest/query/decide/assert steps.

Scenarios are the product walkthroughs made checkable: each step maps
onto a service operation, and assert steps compare prior step outputs
(and the orchestration record behind them) against expected values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from verticore.events import EventKind
from verticore.service import ApiError, ServiceCore


@dataclass
class StepResult:
    index: int
    action: str
    detail: str
    ok: bool
    message: str = ""


class ScenarioError(Exception):
    pass


class ScenarioRunner:
    def __init__(self, core: ServiceCore) -> None:
        self.core = core

    def run_file(self, path: str | Path) -> tuple[bool, list[StepResult], str]:
        path = Path(path)
        script = json.loads(path.read_text(encoding="utf-8"))
        base = path.parent
        outputs: dict[str, dict] = {}
        rows: list[StepResult] = []
        for index, step in enumerate(script.get("steps", []), start=1):
            action = step.get("action")
            try:
                if action == "ingest":
                    corpus = (base / step["path"]).resolve()
                    result = self.core.ingest_corpus(
                        step["domain"], corpus.read_text(encoding="utf-8")
                    )
                    detail = f"{step['domain']} <- {Path(step['path']).name}"
                    rows.append(StepResult(index, action, detail, True, f"upserted {result['upserted']}"))
                elif action == "query":
                    body = {
                        "session_id": step["session_id"],
                        "text": step["text"],
                        "pattern": step["pattern"],
                    }
                    if "persona" in step:
                        body["persona"] = step["persona"]
                    if "domain" in step:
                        body["domain"] = step["domain"]
                    result = self.core.submit_query(body)
                    outputs[step["label"]] = result
                    rows.append(StepResult(index, action, step["label"], True, result["status"]))
                elif action == "decide":
                    source = outputs.get(step["review_from"])
                    if source is None or "review_id" not in source:
                        raise ScenarioError(f"step references no review: {step['review_from']}")
                    body = {"status": step["status"]}
                    if "note" in step:
                        body["note"] = step["note"]
                    if "replacement_text" in step:
                        body["replacement_text"] = step["replacement_text"]
                    result = self.core.post_decision(source["review_id"], body)
                    outputs[step.get("label", step["review_from"] + ":decision")] = result
                    rows.append(StepResult(index, action, source["review_id"], True, result["status"]))
                elif action == "assert":
                    target = outputs.get(step["target"])
                    if target is None:
                        raise ScenarioError(f"assert references unknown step: {step['target']}")
                    failures = self._check(step.get("checks", {}), target)
                    ok = not failures
                    rows.append(
                        StepResult(index, action, step["target"], ok, "; ".join(failures) or "all checks hold")
                    )
                else:
                    raise ScenarioError(f"unknown action: {action!r}")
            except (ApiError, ScenarioError, OSError, KeyError) as exc:
                rows.append(StepResult(index, action or "?", "", False, str(exc)))
        passed = all(r.ok for r in rows)
        digest = self.core.runtime.state_digest()
        return passed, rows, digest

    def _orchestration_record(self, query_id: str) -> dict | None:
        found = self.core.runtime.events.find(EventKind.ORCHESTRATION, query_id=query_id)
        for record in found:
            if record.payload.get("pattern") == "orchestrated":
                return record.payload["record"]
        return None

    def _check(self, checks: dict, target: dict) -> list[str]:
        failures = []
        response = target.get("response") or {}
        provenance = response.get("provenance") or {}
        for name, expected in checks.items():
            actual = None
            if name == "status":
                actual = target.get("status")
            elif name == "response_contains":
                text = response.get("text", "")
                if expected not in text:
                    failures.append(f"response_contains: {expected!r} not in response text")
                continue
            elif name == "domains_touched":
                actual = provenance.get("domains_touched")
            elif name == "verdict":
                actual = (provenance.get("risk") or {}).get("verdict")
            elif name in ("subtask_count", "agent_result_count", "capabilities_distinct", "agent_names"):
                record = self._orchestration_record(target.get("query_id", ""))
                if record is None:
                    failures.append(f"{name}: no orchestration record for query")
                    continue
                if name == "subtask_count":
                    actual = len(record["plan"])
                elif name == "agent_result_count":
                    actual = len(record["results"])
                elif name == "capabilities_distinct":
                    caps = [s["capability"] for s in record["plan"]]
                    actual = len(set(caps)) == len(caps)
                else:
                    actual = [r["agent_name"] for r in record["results"]]
            elif name == "review_status":
                review_id = target.get("review_id")
                if review_id:
                    actual = self.core.get_review(review_id)["status"]
                else:
                    actual = target.get("status")
            elif name == "pending_count":
                actual = len(self.core.list_reviews("pending"))
            else:
                failures.append(f"unknown check: {name}")
                continue
            if actual != expected:
                failures.append(f"{name}: expected {expected!r}, got {actual!r}")
        return failures


def format_table(name: str, rows: list[StepResult], passed: bool, digest: str) -> str:
    lines = [f"scenario: {name}"]
    for row in rows:
        mark = "pass" if row.ok else "FAIL"
        lines.append(f"  [{mark}] step {row.index:>2} {row.action:<7} {row.detail:<28} {row.message}")
    lines.append(f"result: {'pass' if passed else 'FAIL'}")
    lines.append(f"state digest: {digest}")
    return "\n".join(lines)
