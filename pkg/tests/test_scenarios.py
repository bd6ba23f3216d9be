import pytest

from verticore.scenarios import ScenarioRunner, format_table
from verticore.service import ServiceCore

from conftest import FIXTURES

SCENARIOS = sorted(p.stem for p in (FIXTURES / "scenarios").glob("*.json"))


def test_core_scenarios_are_present():
    assert set(SCENARIOS) >= {
        "customer-support",
        "enterprise-reporting",
        "healthcare-assistance",
        "legal-case",
        "portfolio",
        "supply-chain",
    }


@pytest.mark.parametrize("name", SCENARIOS)
def test_scenario_passes_in_isolation(make_runtime, name):
    runtime = make_runtime(subdir=name)
    runner = ScenarioRunner(ServiceCore(runtime))
    passed, rows, digest = runner.run_file(FIXTURES / "scenarios" / f"{name}.json")
    table = format_table(name, rows, passed, digest)
    assert passed, table
    assert all(row.ok for row in rows)


def test_whole_suite_passes_in_one_runtime(make_runtime):
    runtime = make_runtime()
    runner = ScenarioRunner(ServiceCore(runtime))
    for name in SCENARIOS:
        passed, rows, digest = runner.run_file(FIXTURES / "scenarios" / f"{name}.json")
        assert passed, format_table(name, rows, passed, digest)


def test_failing_assert_marks_step(make_runtime, tmp_path):
    runtime = make_runtime()
    scenario = tmp_path / "failing.json"
    scenario.write_text(
        """
        {
          "name": "failing",
          "steps": [
            {"action": "query", "label": "q", "pattern": "router", "session_id": "s",
             "text": "Summarize recent IP law precedents in technology"},
            {"action": "assert", "target": "q", "checks": {"domains_touched": ["financial"]}}
          ]
        }
        """
    )
    runner = ScenarioRunner(ServiceCore(runtime))
    passed, rows, _ = runner.run_file(scenario)
    assert not passed
    assert rows[-1].ok is False
    assert "domains_touched" in rows[-1].message
