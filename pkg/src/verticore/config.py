"""Runtime configuration: a strict JSON file with defaults for every key.

Unknown keys are rejected outright; a config that loads is a config the
runtime fully understands. Relative paths resolve against the config
file's own directory so fixture trees stay relocatable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from verticore.errors import InvalidValue, MissingFile

CONFIG_ENV_VAR = "VERTICORE_CONFIG"

DEFAULT_REFUSAL_TEXT = (
    "This response was withheld because it failed the safety screen. "
    "Please rephrase your request or contact a reviewer."
)
DEFAULT_REJECTION_TEXT = (
    "A reviewing expert declined to release an answer for this request."
)
DEFAULT_FAILURE_MARKER = "[subtask unavailable]"
DEFAULT_NO_FEEDBACK_MARKER = "(no prior expert feedback)"


@dataclass(frozen=True)
class PathsConfig:
    corpus_dir: Path | None = None
    kg_seed: Path | None = None
    templates_dir: Path | None = None
    toxicity_lexicon: Path | None = None
    capability_lexicon: Path | None = None
    rule_table: Path | None = None
    search_fixtures: Path | None = None
    scenario_dir: Path | None = None
    event_log: Path = Path("events.jsonl")


@dataclass(frozen=True)
class GuardrailConfig:
    threshold: float = 0.5
    screen_inputs: bool = False


@dataclass(frozen=True)
class RouterConfig:
    min_confidence: float = 0.0
    refusal_text: str = DEFAULT_REFUSAL_TEXT
    chain_domain: str | None = None


@dataclass(frozen=True)
class HitlConfig:
    rejection_text: str = DEFAULT_REJECTION_TEXT
    feedback_k: int = 2
    no_feedback_marker: str = DEFAULT_NO_FEEDBACK_MARKER


@dataclass(frozen=True)
class OrchestratorConfig:
    failure_marker: str = DEFAULT_FAILURE_MARKER


@dataclass(frozen=True)
class BackendConfig:
    mode: str = "scripted"
    url: str | None = None
    model: str = "verticore-remote"
    max_retries: int = 2
    timeout: float = 10.0
    search_url: str | None = None


@dataclass(frozen=True)
class ServiceConfig:
    listen: str = "127.0.0.1:8080"
    deterministic: bool = True


@dataclass(frozen=True)
class Config:
    seed: int = 0
    retrieval_k: int = 3
    parallelism: int = 4
    default_persona: str = "professional"
    paths: PathsConfig = field(default_factory=PathsConfig)
    guardrail: GuardrailConfig = field(default_factory=GuardrailConfig)
    router: RouterConfig = field(default_factory=RouterConfig)
    hitl: HitlConfig = field(default_factory=HitlConfig)
    orchestrator: OrchestratorConfig = field(default_factory=OrchestratorConfig)
    backend: BackendConfig = field(default_factory=BackendConfig)
    service: ServiceConfig = field(default_factory=ServiceConfig)
    personas: dict = field(default_factory=dict)

    def summary(self) -> dict:
        """Canonical JSON-able view, recorded in the config-loaded event."""
        return {
            "seed": self.seed,
            "retrieval_k": self.retrieval_k,
            "parallelism": self.parallelism,
            "default_persona": self.default_persona,
            "guardrail": {"threshold": self.guardrail.threshold, "screen_inputs": self.guardrail.screen_inputs},
            "router": {"min_confidence": self.router.min_confidence, "chain_domain": self.router.chain_domain},
            "hitl": {"feedback_k": self.hitl.feedback_k},
            "backend": {"mode": self.backend.mode, "model": self.backend.model},
            "service": {"deterministic": self.service.deterministic},
        }


def _section(raw: dict, key: str, cls, base: Path, path_fields: set[str] = frozenset()):
    data = raw.get(key, {})
    if not isinstance(data, dict):
        raise InvalidValue(key, "expected an object")
    known = {f.name for f in fields(cls)}
    for sub in data:
        if sub not in known:
            raise InvalidValue(f"{key}.{sub}", "unknown key")
    kwargs = {}
    for sub, value in data.items():
        if sub in path_fields and value is not None:
            value = (base / value).resolve() if not Path(value).is_absolute() else Path(value)
        kwargs[sub] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise InvalidValue(key, str(exc)) from exc


_TOP_LEVEL = {
    "seed",
    "retrieval_k",
    "parallelism",
    "default_persona",
    "paths",
    "guardrail",
    "router",
    "hitl",
    "orchestrator",
    "backend",
    "service",
    "personas",
}

_PATH_FIELDS = {
    "corpus_dir",
    "kg_seed",
    "templates_dir",
    "toxicity_lexicon",
    "capability_lexicon",
    "rule_table",
    "search_fixtures",
    "scenario_dir",
    "event_log",
}


def load_config(path: str | Path) -> Config:
    """Load, validate, and resolve a config file.

    Validation is strict: unknown keys, out-of-range values, and missing
    referenced files all fail loading.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"config file not found: {path}")
    base = path.parent.resolve()
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidValue("<file>", f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise InvalidValue("<file>", "config root must be an object")
    for key in raw:
        if key not in _TOP_LEVEL:
            raise InvalidValue(key, "unknown key")

    paths = _section(raw, "paths", PathsConfig, base, _PATH_FIELDS)
    config = Config(
        seed=raw.get("seed", 0),
        retrieval_k=raw.get("retrieval_k", 3),
        parallelism=raw.get("parallelism", 4),
        default_persona=raw.get("default_persona", "professional"),
        paths=paths,
        guardrail=_section(raw, "guardrail", GuardrailConfig, base),
        router=_section(raw, "router", RouterConfig, base),
        hitl=_section(raw, "hitl", HitlConfig, base),
        orchestrator=_section(raw, "orchestrator", OrchestratorConfig, base),
        backend=_section(raw, "backend", BackendConfig, base),
        service=_section(raw, "service", ServiceConfig, base),
        personas=raw.get("personas", {}),
    )
    _validate(config)
    return config


def _validate(config: Config) -> None:
    if not isinstance(config.seed, int):
        raise InvalidValue("seed", "must be an integer")
    if not isinstance(config.retrieval_k, int) or config.retrieval_k < 1:
        raise InvalidValue("retrieval_k", "must be an integer >= 1")
    if not isinstance(config.parallelism, int) or config.parallelism < 1:
        raise InvalidValue("parallelism", "must be an integer >= 1")
    if config.default_persona not in ("empathetic", "professional", "casual"):
        raise InvalidValue("default_persona")
    threshold = config.guardrail.threshold
    if not isinstance(threshold, (int, float)) or not 0.0 <= threshold <= 1.0:
        raise InvalidValue("guardrail.threshold", "must lie in [0, 1]")
    confidence = config.router.min_confidence
    if not isinstance(confidence, (int, float)) or not -1.0 <= confidence <= 1.0:
        raise InvalidValue("router.min_confidence", "must lie in [-1, 1]")
    if config.hitl.feedback_k < 0:
        raise InvalidValue("hitl.feedback_k", "must be >= 0")
    if config.backend.mode not in ("scripted", "remote"):
        raise InvalidValue("backend.mode", "must be 'scripted' or 'remote'")
    if config.backend.mode == "remote" and not config.backend.url:
        raise InvalidValue("backend.url", "required for remote mode")
    if not isinstance(config.personas, dict):
        raise InvalidValue("personas", "must map persona tags to directive lists")
    for tag, lines in config.personas.items():
        if tag not in ("empathetic", "professional", "casual"):
            raise InvalidValue(f"personas.{tag}", "unknown persona tag")
        if not isinstance(lines, list) or not all(isinstance(x, str) for x in lines) or not lines:
            raise InvalidValue(f"personas.{tag}", "must be a non-empty list of strings")
    listen = config.service.listen
    if not isinstance(listen, str) or ":" not in listen:
        raise InvalidValue("service.listen", "expected host:port")
    for name in _PATH_FIELDS:
        value = getattr(config.paths, name)
        if value is None:
            continue
        if name == "event_log":
            if not Path(value).parent.is_dir():
                raise InvalidValue("paths.event_log", "parent directory must exist")
        elif not Path(value).exists():
            raise InvalidValue(f"paths.{name}", f"path does not exist: {value}")
