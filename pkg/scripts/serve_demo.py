#!/usr/bin/env python3
"""Serve a demo instance seeded with the repo fixtures.

Boots the service on 127.0.0.1:8080 (override with --listen), pre-loads
all fixture corpora and the knowledge graph, and optionally queues a few
pending reviews so the review console has something to show.
"""

import argparse
import json
import sys
import tempfile
from pathlib import Path

from verticore.config import load_config
from verticore.http_api import ServiceServer
from verticore.runtime import Runtime
from verticore.service import ServiceCore

REPO = Path(__file__).resolve().parent.parent

REVIEW_SEEDS = [
    ("What treatment options should I discuss for early hypertension", "healthcare"),
    ("How should we phrase the refund override note", "customer"),
    ("Summarize the supplier scorecard for the quarterly review", "supply"),
]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--listen", default="127.0.0.1:8080")
    parser.add_argument("--seed-reviews", action="store_true", help="queue 3 pending reviews")
    args = parser.parse_args()

    fixtures = REPO / "fixtures"
    workdir = Path(tempfile.mkdtemp(prefix="verticore-demo-"))
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
        "service": {"listen": args.listen},
    }
    config_path = workdir / "config.json"
    config_path.write_text(json.dumps(config, indent=2))

    runtime = Runtime.from_config(load_config(config_path))
    if args.seed_reviews:
        for text, domain in REVIEW_SEEDS:
            item = runtime.hitl.submit_for_review(text, "demo", domain)
            print(f"queued review {item.review_id} on {domain}")

    host, port = args.listen.rsplit(":", 1)
    server = ServiceServer(ServiceCore(runtime), host, int(port)).start()
    print(f"verticore demo on http://{server.address}  (event log: {workdir / 'events.jsonl'})")
    print("Ctrl-C to stop")
    try:
        while True:
            server.join(timeout=1)
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
        runtime.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
