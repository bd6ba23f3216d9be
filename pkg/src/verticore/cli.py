"""Operator CLI: ingest, ask, serve, scenario runs, and log replay.

Every command maps onto a service operation; --local embeds the service
in-process, otherwise requests go to a running server over HTTP.

Exit codes: 0 ok, 1 assert or log failure, 2 no confident route,
3 backend failure, 64 usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import urllib.error
import urllib.request
from pathlib import Path

from verticore.config import CONFIG_ENV_VAR, load_config
from verticore.errors import CorruptLog, MissingFile, InvalidValue
from verticore.http_api import ServiceServer
from verticore.runtime import Runtime, replay
from verticore.scenarios import ScenarioRunner, format_table
from verticore.service import ApiError, ServiceCore

ADDR_ENV_VAR = "VERTICORE_ADDR"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_ROUTING = 2
EXIT_BACKEND = 3
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class CliParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> CliParser:
    parser = CliParser(prog="verticore")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--config", help="config file (or VERTICORE_CONFIG)")

    ingest = sub.add_parser("ingest", help="upsert a JSON Lines corpus")
    ingest.add_argument("--domain", required=True)
    ingest.add_argument("--path", required=True)
    _target_flags(ingest)

    ask = sub.add_parser("ask", help="run one query through a pattern")
    ask.add_argument("--pattern", required=True)
    ask.add_argument("--session", default="cli")
    ask.add_argument("--persona")
    ask.add_argument("--domain")
    ask.add_argument("text")
    _target_flags(ask)

    scenario = sub.add_parser("scenario", help="run a scripted scenario")
    scenario_sub = scenario.add_subparsers(dest="scenario_command", required=True)
    run = scenario_sub.add_parser("run")
    run.add_argument("name")
    run.add_argument("--config", help="config file (or VERTICORE_CONFIG)")

    rep = sub.add_parser("replay", help="fold an event log and print its digest")
    rep.add_argument("--log", required=True)
    return parser


def _target_flags(parser) -> None:
    parser.add_argument("--local", action="store_true", help="embed the service in-process")
    parser.add_argument("--config", help="config file for --local mode")
    parser.add_argument("--addr", help="server address (or VERTICORE_ADDR)")


def _load_local_core(config_path: str | None) -> ServiceCore:
    path = config_path or os.environ.get(CONFIG_ENV_VAR)
    if not path:
        raise UsageError("--local mode needs --config or VERTICORE_CONFIG")
    return ServiceCore(Runtime.from_config(load_config(path)))


class HttpClient:
    """Minimal JSON client mirroring ServiceCore's surface."""

    def __init__(self, addr: str) -> None:
        self.base = addr if addr.startswith("http") else f"http://{addr}"

    def _request(self, method: str, path: str, body=None, raw: str | None = None):
        data = None
        headers = {}
        if raw is not None:
            data = raw.encode("utf-8")
            headers["Content-Type"] = "application/x-ndjson"
        elif body is not None:
            data = json.dumps(body).encode("utf-8")
            headers["Content-Type"] = "application/json"
        request = urllib.request.Request(self.base + path, data=data, headers=headers, method=method)
        try:
            with urllib.request.urlopen(request, timeout=30) as reply:
                return json.loads(reply.read().decode("utf-8"))
        except urllib.error.HTTPError as exc:
            payload = json.loads(exc.read().decode("utf-8") or "{}")
            raise ApiError(exc.code, payload.get("error", "HttpError"), payload.get("detail", "")) from exc
        except urllib.error.URLError as exc:
            raise ApiError(502, "BackendUnavailable", f"cannot reach service: {exc}") from exc

    def submit_query(self, body):
        return self._request("POST", "/v1/queries", body=body)

    def ingest_corpus(self, domain, text_body):
        return self._request("POST", f"/v1/corpus/{domain}/documents", raw=text_body)


def _resolve_target(args) -> object:
    if getattr(args, "local", False):
        return _load_local_core(args.config)
    addr = getattr(args, "addr", None) or os.environ.get(ADDR_ENV_VAR)
    if not addr:
        raise UsageError("pass --local with --config, or --addr / VERTICORE_ADDR")
    return HttpClient(addr)


def _cmd_serve(args) -> int:
    path = args.config or os.environ.get(CONFIG_ENV_VAR)
    if not path:
        raise UsageError("serve needs --config or VERTICORE_CONFIG")
    config = load_config(path)
    runtime = Runtime.from_config(config)
    host, port = config.service.listen.rsplit(":", 1)
    server = ServiceServer(ServiceCore(runtime), host, int(port)).start()
    print(f"verticore service listening on {server.address}")
    try:
        while True:
            server.join(timeout=1)
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
        runtime.close()
    return EXIT_OK


def _close_target(target) -> None:
    runtime = getattr(target, "runtime", None)
    if runtime is not None:
        runtime.close()


def _cmd_ingest(args) -> int:
    corpus = Path(args.path)
    if not corpus.is_file():
        print(f"no such corpus file: {corpus}", file=sys.stderr)
        return EXIT_FAILURE
    text = corpus.read_text(encoding="utf-8")
    target = _resolve_target(args)
    try:
        result = target.ingest_corpus(args.domain, text)
    finally:
        _close_target(target)
    print(f"upserted: {result['upserted']}")
    return EXIT_OK


def _cmd_ask(args) -> int:
    if args.pattern not in ("router", "orchestrated", "workflow-chain", "hitl"):
        raise UsageError(f"unknown pattern: {args.pattern}")
    body = {"session_id": args.session, "text": args.text, "pattern": args.pattern}
    if args.persona:
        body["persona"] = args.persona
    if args.domain:
        body["domain"] = args.domain
    target = _resolve_target(args)
    try:
        result = target.submit_query(body)
    finally:
        _close_target(target)
    if result["status"] == "pending-review":
        print(f"pending-review {result['review_id']}")
        return EXIT_OK
    response = result["response"]
    provenance = response["provenance"]
    print(response["text"])
    print()
    documents = ",".join(f"{d[0]}/{d[1]}" for d in provenance["documents"]) or "-"
    print(
        f"pattern={provenance['pattern']} domains={','.join(provenance['domains_touched']) or '-'} "
        f"risk={provenance['risk']['verdict']} documents={documents}"
    )
    print(f"query_id={result['query_id']}")
    return EXIT_OK


def _cmd_scenario(args) -> int:
    path = args.config or os.environ.get(CONFIG_ENV_VAR)
    if not path:
        raise UsageError("scenario run needs --config or VERTICORE_CONFIG")
    config = load_config(path)
    if config.paths.scenario_dir is None:
        raise UsageError("config has no paths.scenario_dir")
    fixture = Path(config.paths.scenario_dir) / f"{args.name}.json"
    if not fixture.is_file():
        print(f"no such scenario: {args.name}", file=sys.stderr)
        return EXIT_FAILURE
    runtime = Runtime.from_config(config)
    try:
        runner = ScenarioRunner(ServiceCore(runtime))
        passed, rows, digest = runner.run_file(fixture)
        print(format_table(args.name, rows, passed, digest))
        return EXIT_OK if passed else EXIT_FAILURE
    finally:
        runtime.close()


def _cmd_replay(args) -> int:
    try:
        state = replay(args.log)
    except CorruptLog as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_FAILURE
    print(f"events: {state.event_count}")
    print(f"state digest: {state.digest()}")
    return EXIT_OK


_COMMANDS = {
    "serve": _cmd_serve,
    "ingest": _cmd_ingest,
    "ask": _cmd_ask,
    "scenario": _cmd_scenario,
    "replay": _cmd_replay,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MissingFile, InvalidValue) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_FAILURE
    except ApiError as exc:
        print(f"{exc.body.get('error')}: {exc.body.get('detail')}", file=sys.stderr)
        if exc.body.get("error") == "NoConfidentRoute":
            return EXIT_ROUTING
        if exc.body.get("error") == "BackendUnavailable":
            return EXIT_BACKEND
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
