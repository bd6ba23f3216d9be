import json
from pathlib import Path

import pytest

from verticore.config import load_config
from verticore.runtime import Runtime

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def write_config(tmp_path: Path, overrides: dict | None = None, use_fixtures: bool = True) -> Path:
    """Write a config file into tmp_path pointing at the repo fixtures."""
    config: dict = {"seed": 7, "service": {"listen": "127.0.0.1:0", "deterministic": True}}
    if use_fixtures:
        config["paths"] = {
            "corpus_dir": str(FIXTURES / "corpora"),
            "kg_seed": str(FIXTURES / "kg" / "triples.jsonl"),
            "templates_dir": str(FIXTURES / "templates"),
            "toxicity_lexicon": str(FIXTURES / "lexicons" / "toxicity.json"),
            "capability_lexicon": str(FIXTURES / "lexicons" / "capabilities.json"),
            "rule_table": str(FIXTURES / "rules" / "scripted_rules.json"),
            "search_fixtures": str(FIXTURES / "search_fixtures.json"),
            "scenario_dir": str(FIXTURES / "scenarios"),
            "event_log": str(tmp_path / "events.jsonl"),
        }
        config["router"] = {"chain_domain": "supply"}
    else:
        config["paths"] = {"event_log": str(tmp_path / "events.jsonl")}
    for key, value in (overrides or {}).items():
        if isinstance(value, dict) and isinstance(config.get(key), dict):
            config[key].update(value)
        else:
            config[key] = value
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config, indent=2), encoding="utf-8")
    return path


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def make_runtime(tmp_path):
    """Factory for runtimes; closes every runtime it built."""
    built = []

    def factory(overrides: dict | None = None, use_fixtures: bool = True, subdir: str | None = None):
        workdir = tmp_path / subdir if subdir else tmp_path
        workdir.mkdir(exist_ok=True)
        config = load_config(write_config(workdir, overrides, use_fixtures))
        runtime = Runtime.from_config(config)
        built.append(runtime)
        return runtime

    yield factory
    for runtime in built:
        runtime.close()


@pytest.fixture
def runtime(make_runtime) -> Runtime:
    """Runtime loaded with the full fixture tree."""
    return make_runtime()


@pytest.fixture
def bare_runtime(make_runtime) -> Runtime:
    """Runtime with defaults only: no corpora, empty lexicons, echo backend."""
    return make_runtime(use_fixtures=False)
