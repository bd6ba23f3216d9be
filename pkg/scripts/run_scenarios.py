#!/usr/bin/env python3
"""Run every scenario fixture against one fresh runtime and print tables.

Uses the repo fixture tree with a temporary event log, then verifies the
log replays to the live state digest.
"""

import argparse
import json
import sys
import tempfile
from pathlib import Path

from verticore.config import load_config
from verticore.runtime import Runtime, replay
from verticore.scenarios import ScenarioRunner, format_table
from verticore.service import ServiceCore

REPO = Path(__file__).resolve().parent.parent


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--fixtures", default=str(REPO / "fixtures"))
    parser.add_argument("--only", help="run a single scenario by name")
    args = parser.parse_args()

    fixtures = Path(args.fixtures).resolve()
    workdir = Path(tempfile.mkdtemp(prefix="verticore-scenarios-"))
    config = {
        "seed": 7,
        "paths": {
            "corpus_dir": str(fixtures / "corpora"),
            "kg_seed": str(fixtures / "kg" / "triples.jsonl"),
            "templates_dir": str(fixtures / "templates"),
            "toxicity_lexicon": str(fixtures / "lexicons" / "toxicity.json"),
            "capability_lexicon": str(fixtures / "lexicons" / "capabilities.json"),
            "rule_table": str(fixtures / "rules" / "scripted_rules.json"),
            "search_fixtures": str(fixtures / "search_fixtures.json"),
            "scenario_dir": str(fixtures / "scenarios"),
            "event_log": str(workdir / "events.jsonl"),
        },
        "router": {"chain_domain": "supply"},
    }
    config_path = workdir / "config.json"
    config_path.write_text(json.dumps(config, indent=2))

    runtime = Runtime.from_config(load_config(config_path))
    runner = ScenarioRunner(ServiceCore(runtime))
    names = [args.only] if args.only else sorted(p.stem for p in (fixtures / "scenarios").glob("*.json"))
    all_ok = True
    for name in names:
        passed, rows, digest = runner.run_file(fixtures / "scenarios" / f"{name}.json")
        print(format_table(name, rows, passed, digest))
        print()
        all_ok = all_ok and passed

    live = runtime.state_digest()
    runtime.close()
    replayed = replay(workdir / "events.jsonl").digest()
    print(f"live digest  : {live}")
    print(f"replay digest: {replayed}")
    print(f"event log    : {workdir / 'events.jsonl'}")
    if live != replayed:
        print("REPLAY MISMATCH", file=sys.stderr)
        return 1
    return 0 if all_ok else 1


if __name__ == "__main__":
    sys.exit(main())
