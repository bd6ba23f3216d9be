import json

import pytest

from verticore.cli import main
from verticore.http_api import ServiceServer
from verticore.service import ServiceCore

from conftest import FIXTURES, write_config

IP_LAW_QUERY = "Summarize recent IP law precedents in technology"


@pytest.fixture
def config_path(tmp_path):
    return str(write_config(tmp_path))


def test_usage_error_without_args():
    with pytest.raises(SystemExit):  # argparse exits before our handler for -h only
        main(["--help"])


def test_unknown_pattern_is_usage_error(config_path):
    code = main(["ask", "--pattern", "zigzag", "--local", "--config", config_path, "hello"])
    assert code == 64


def test_missing_target_is_usage_error():
    code = main(["ask", "--pattern", "router", "hello"])
    assert code == 64


def test_ask_router_local_prints_provenance(config_path, capsys):
    code = main(
        ["ask", "--pattern", "router", "--session", "cli-1", "--local", "--config", config_path, IP_LAW_QUERY]
    )
    out = capsys.readouterr().out
    assert code == 0
    assert "domains=legal" in out
    assert "risk=allow" in out
    assert "query_id=q-" in out


def test_ask_hitl_prints_review_id(config_path, capsys):
    code = main(
        [
            "ask", "--pattern", "hitl", "--session", "cli-2", "--domain", "healthcare",
            "--local", "--config", config_path, "What treatment options should I discuss",
        ]
    )
    out = capsys.readouterr().out
    assert code == 0
    assert out.startswith("pending-review rev-")


def test_ask_routing_failure_exits_two(tmp_path, capsys):
    config = write_config(tmp_path, overrides={"router": {"min_confidence": 0.999}})
    code = main(
        ["ask", "--pattern", "router", "--local", "--config", str(config), "zzz qqq completely foreign"]
    )
    assert code == 2


def test_ask_backend_failure_exits_three(tmp_path):
    config = write_config(
        tmp_path,
        overrides={
            "backend": {"mode": "remote", "url": "http://127.0.0.1:9", "max_retries": 0, "timeout": 0.2}
        },
    )
    code = main(["ask", "--pattern", "router", "--local", "--config", str(config), IP_LAW_QUERY])
    assert code == 3


def test_ingest_local_counts_upserts(tmp_path, capsys):
    config = write_config(tmp_path, use_fixtures=False)
    corpus = FIXTURES / "corpora" / "legal.jsonl"
    code = main(["ingest", "--domain", "legal", "--path", str(corpus), "--local", "--config", str(config)])
    out = capsys.readouterr().out
    assert code == 0
    assert out.strip() == "upserted: 6"


def test_ingest_malformed_line_fails_with_line_number(tmp_path, capsys):
    config = write_config(tmp_path, use_fixtures=False)
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"doc_id": "a", "domain": "d", "text": "ok"}\n{broken\n')
    code = main(["ingest", "--domain", "d", "--path", str(bad), "--local", "--config", str(config)])
    err = capsys.readouterr().err
    assert code == 1
    assert "line 2" in err


def test_scenario_run_prints_pass_table(config_path, capsys):
    code = main(["scenario", "run", "enterprise-reporting", "--config", config_path])
    out = capsys.readouterr().out
    assert code == 0
    assert "scenario: enterprise-reporting" in out
    assert "result: pass" in out
    assert "state digest:" in out


def test_scenario_run_unknown_name(config_path, capsys):
    code = main(["scenario", "run", "not-a-scenario", "--config", config_path])
    assert code == 1


def test_scenario_run_is_deterministic(config_path, tmp_path, capsys):
    outputs = []
    for name in ("a", "b"):
        subdir = tmp_path / name
        subdir.mkdir()
        config = write_config(subdir)
        code = main(["scenario", "run", "supply-chain", "--config", str(config)])
        assert code == 0
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1]


def test_replay_prints_digest_matching_scenario_digest(config_path, capsys):
    code = main(["scenario", "run", "portfolio", "--config", config_path])
    assert code == 0
    scenario_out = capsys.readouterr().out
    digest_line = [l for l in scenario_out.splitlines() if l.startswith("state digest:")][0]
    config = json.loads(open(config_path).read())
    code = main(["replay", "--log", config["paths"]["event_log"]])
    replay_out = capsys.readouterr().out
    assert code == 0
    assert digest_line in replay_out


def test_replay_corrupt_log_exits_one(tmp_path, capsys):
    log = tmp_path / "events.jsonl"
    log.write_text("garbage\n")
    code = main(["replay", "--log", str(log)])
    err = capsys.readouterr().err
    assert code == 1
    assert "line 1" in err


def test_ask_against_live_server(tmp_path, capsys):
    from verticore.config import load_config
    from verticore.runtime import Runtime

    runtime = Runtime.from_config(load_config(write_config(tmp_path)))
    server = ServiceServer(ServiceCore(runtime), "127.0.0.1", 0).start()
    try:
        code = main(["ask", "--pattern", "router", "--addr", server.address, IP_LAW_QUERY])
        out = capsys.readouterr().out
        assert code == 0
        assert "domains=legal" in out
    finally:
        server.stop()
        runtime.close()
