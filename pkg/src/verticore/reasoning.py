"""Reasoning engine: prompt templates, completion backends, query
decomposition, and persona framing.

The scripted backend is the reference implementation: a rule table makes
every pipeline a pure function of its inputs, so end-to-end transcripts
can be asserted byte-for-byte. The remote backend speaks the common
chat-completion wire shape and exists for deployments with a real model;
nothing in the test suite depends on it being reachable.
"""

from __future__ import annotations

import json
import os
import re
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from enum import Enum

from verticore.errors import (
    BackendUnavailable,
    EmptyPrompt,
    EmptyQuery,
    MissingVariable,
    UnknownTemplate,
)

_PLACEHOLDER = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")

TOKEN_ENV_VAR = "VERTICORE_LLM_TOKEN"


@dataclass(frozen=True)
class PromptTemplate:
    """Text with {name} placeholders; placeholders define required_vars."""

    template_id: str
    body: str
    required_vars: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        found = frozenset(_PLACEHOLDER.findall(self.body))
        if not self.required_vars:
            object.__setattr__(self, "required_vars", found)
        elif self.required_vars != found:
            raise ValueError(
                f"template {self.template_id}: required_vars {sorted(self.required_vars)} "
                f"do not match body placeholders {sorted(found)}"
            )


class TemplateRegistry:
    def __init__(self) -> None:
        self._templates: dict[str, PromptTemplate] = {}

    def register(self, template: PromptTemplate) -> None:
        self._templates[template.template_id] = template

    def get(self, template_id: str) -> PromptTemplate:
        try:
            return self._templates[template_id]
        except KeyError:
            raise UnknownTemplate(f"no template registered as {template_id!r}") from None

    def render(self, template_id: str, variables: dict[str, str]) -> str:
        """Substitute every placeholder in one pass, verbatim."""
        template = self.get(template_id)
        for name in sorted(template.required_vars):
            if name not in variables:
                raise MissingVariable(name)
        # Single pass: placeholder-looking text inside values is never re-expanded.
        return _PLACEHOLDER.sub(lambda m: variables[m.group(1)], template.body)


class PersonaTag(str, Enum):
    EMPATHETIC = "empathetic"
    PROFESSIONAL = "professional"
    CASUAL = "casual"


@dataclass(frozen=True)
class Persona:
    tag: PersonaTag
    directives: tuple[str, ...]


DEFAULT_PERSONAS: dict[str, tuple[str, ...]] = {
    "empathetic": (
        "I understand this matters to you, so let me walk through it gently.",
        "Please reach out again any time; I am here to help.",
    ),
    "professional": (
        "Please find the requested analysis below.",
        "Prepared by your advisory agent.",
    ),
    "casual": (
        "Hey! Here's the quick version:",
        "Hope that helps!",
    ),
}


def build_personas(directives: dict[str, list[str]] | None = None) -> dict[str, Persona]:
    table = {}
    merged = dict(DEFAULT_PERSONAS)
    for tag, lines in (directives or {}).items():
        merged[tag] = tuple(lines)
    for tag in PersonaTag:
        table[tag.value] = Persona(tag=tag, directives=tuple(merged[tag.value]))
    return table


def apply_persona(payload_text: str, persona: Persona) -> str:
    """Wrap the payload between the persona's framing and closing lines.

    The payload is never rewritten: it appears verbatim between the
    directive text.
    """
    framing = persona.directives[0] if persona.directives else ""
    closing = persona.directives[-1] if len(persona.directives) > 1 else ""
    parts = [p for p in (framing, payload_text, closing) if p]
    return "\n\n".join(parts)


class FinishReason(str, Enum):
    COMPLETE = "complete"
    TRUNCATED = "truncated"
    REFUSED = "refused"


@dataclass(frozen=True)
class CompletionRequest:
    prompt: str
    persona: Persona | None = None
    max_length: int | None = None


@dataclass(frozen=True)
class CompletionResult:
    text: str
    backend_id: str
    finish_reason: FinishReason


@dataclass(frozen=True)
class Rule:
    pattern: str
    completion: str


class ScriptedBackend:
    """Rule-table completion: a pure function of (rules, prompt).

    The winning rule is the one whose pattern is the longest substring of
    the prompt; ties go to the earlier rule in the table. {match} in the
    completion text expands to the matched pattern. With no matching rule
    the final prompt line is echoed back.
    """

    backend_id = "scripted"
    capability = "deterministic-scripted"

    def __init__(self, rules: list[Rule] | None = None) -> None:
        self._rules = list(rules or [])

    def complete(self, request: CompletionRequest) -> CompletionResult:
        if not request.prompt:
            raise EmptyPrompt("prompt must be non-empty")
        best: Rule | None = None
        best_len = -1
        for rule in self._rules:
            if rule.pattern in request.prompt and len(rule.pattern) > best_len:
                best = rule
                best_len = len(rule.pattern)
        if best is not None:
            text = best.completion.replace("{match}", best.pattern)
        else:
            lines = request.prompt.splitlines()
            text = "ECHO: " + (lines[-1] if lines else "")
        if request.max_length is not None and len(text) > request.max_length:
            return CompletionResult(
                text=text[: request.max_length],
                backend_id=self.backend_id,
                finish_reason=FinishReason.TRUNCATED,
            )
        return CompletionResult(
            text=text, backend_id=self.backend_id, finish_reason=FinishReason.COMPLETE
        )


_FINISH_MAP = {
    "stop": FinishReason.COMPLETE,
    "length": FinishReason.TRUNCATED,
    "content_filter": FinishReason.REFUSED,
}


class RemoteBackend:
    """Chat-completion client over HTTP POST.

    Body: {model, messages, max_tokens}; completion text is read from
    choices[0].message.content. Bearer auth comes from the
    VERTICORE_LLM_TOKEN environment variable when set.
    """

    backend_id = "remote-http"
    capability = "remote-http"

    def __init__(
        self,
        url: str,
        model: str = "verticore-default",
        max_retries: int = 2,
        timeout: float = 10.0,
    ) -> None:
        self._url = url
        self._model = model
        self._max_retries = max_retries
        self._timeout = timeout

    def complete(self, request: CompletionRequest) -> CompletionResult:
        if not request.prompt:
            raise EmptyPrompt("prompt must be non-empty")
        body = {
            "model": self._model,
            "messages": [{"role": "user", "content": request.prompt}],
            "max_tokens": request.max_length if request.max_length is not None else 512,
        }
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(TOKEN_ENV_VAR)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        data = json.dumps(body).encode("utf-8")
        last_error: Exception | None = None
        for _ in range(self._max_retries + 1):
            http_request = urllib.request.Request(
                self._url, data=data, headers=headers, method="POST"
            )
            try:
                with urllib.request.urlopen(http_request, timeout=self._timeout) as reply:
                    parsed = json.loads(reply.read().decode("utf-8"))
                choice = parsed["choices"][0]
                return CompletionResult(
                    text=choice["message"]["content"],
                    backend_id=self.backend_id,
                    finish_reason=_FINISH_MAP.get(
                        choice.get("finish_reason", "stop"), FinishReason.COMPLETE
                    ),
                )
            except (urllib.error.URLError, OSError, ValueError, KeyError, IndexError) as exc:
                last_error = exc
        raise BackendUnavailable(f"remote backend failed: {last_error}") from last_error


@dataclass(frozen=True)
class SubtaskDraft:
    index: int
    description: str
    capability_hint: str


def split_clauses(text: str) -> list[str]:
    """Split on top-level conjunctions: ',', ';', and the word 'and'.

    'and' only splits at word boundaries (non-alphanumeric neighbors or
    text ends); fragments are trimmed and empties dropped.
    """
    parts: list[str] = []
    buf: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in ",;":
            parts.append("".join(buf))
            buf = []
            i += 1
            continue
        if text[i : i + 3].lower() == "and":
            before_ok = i == 0 or not text[i - 1].isalnum()
            after_ok = i + 3 >= n or not text[i + 3].isalnum()
            if before_ok and after_ok:
                parts.append("".join(buf))
                buf = []
                i += 3
                continue
        buf.append(ch)
        i += 1
    parts.append("".join(buf))
    return [p.strip() for p in parts if p.strip()]


class CapabilityLexicon:
    """Ordered keyword -> capability map; first matching keyword wins."""

    def __init__(
        self, entries: dict[str, str] | None = None, default: str = "vector-search"
    ) -> None:
        self._entries = list((entries or {}).items())
        self._default = default

    def hint_for(self, description: str) -> str:
        lowered = description.lower()
        for keyword, capability in self._entries:
            if keyword.lower() in lowered:
                return capability
        return self._default


def parse_subtask_reply(text: str) -> list[str]:
    """Parse a structured decomposition reply: JSON array or dashed lines."""
    try:
        parsed = json.loads(text)
        if isinstance(parsed, list) and all(isinstance(x, str) for x in parsed):
            return [x.strip() for x in parsed if x.strip()]
    except json.JSONDecodeError:
        pass
    items = []
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith("- "):
            items.append(stripped[2:].strip())
    return [x for x in items if x]


class ReasoningEngine:
    """Templating, completion, decomposition, and persona framing."""

    def __init__(
        self,
        templates: TemplateRegistry,
        backend,
        personas: dict[str, Persona],
        lexicon: CapabilityLexicon,
        decompose_remotely: bool = False,
    ) -> None:
        self.templates = templates
        self.backend = backend
        self.personas = personas
        self.lexicon = lexicon
        self._decompose_remotely = decompose_remotely

    def render_template(self, template_id: str, variables: dict[str, str]) -> str:
        return self.templates.render(template_id, variables)

    def complete(self, request: CompletionRequest) -> CompletionResult:
        return self.backend.complete(request)

    def persona(self, tag: str) -> Persona:
        return self.personas[PersonaTag(tag).value]

    def apply_persona(self, payload_text: str, persona: Persona) -> str:
        return apply_persona(payload_text, persona)

    def decompose(self, query_text: str) -> list[SubtaskDraft]:
        """Break a query into sequential subtask drafts.

        Scripted mode splits on top-level conjunctions. Remote mode asks
        the backend for a structured list and falls back to a single
        subtask when the reply does not parse.
        """
        if not query_text or not query_text.strip():
            raise EmptyQuery("query must be non-empty")
        if self._decompose_remotely:
            prompt = self.templates.render("decompose", {"q": query_text})
            reply = self.backend.complete(CompletionRequest(prompt=prompt))
            fragments = parse_subtask_reply(reply.text)
            if not fragments:
                fragments = [query_text.strip()]
        else:
            fragments = split_clauses(query_text)
        return [
            SubtaskDraft(
                index=i, description=desc, capability_hint=self.lexicon.hint_for(desc)
            )
            for i, desc in enumerate(fragments)
        ]
