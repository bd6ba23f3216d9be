"""Cognitive skills hub: skill registry and concrete guardrail classifiers.

The registry is the model hub: purpose-built inference capabilities are
registered as descriptors and looked up by capability tag. Guardrails are
implemented here as deterministic lexicon and pattern detectors so their
verdicts are exactly checkable; a learned classifier can replace either
detector behind the same registry entry.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from verticore.errors import DuplicateSkill, SkillNotImplemented, UnknownSkill


class SkillStatus(str, Enum):
    IMPLEMENTED = "implemented"
    STUB = "stub"


@dataclass(frozen=True)
class SkillDescriptor:
    name: str
    version: str
    capability: str
    status: SkillStatus = SkillStatus.STUB


class SkillRegistry:
    def __init__(self) -> None:
        self._skills: dict[tuple[str, str], SkillDescriptor] = {}
        self._handlers: dict[tuple[str, str], object] = {}

    def register(self, descriptor: SkillDescriptor, handler=None) -> SkillDescriptor:
        key = (descriptor.name, descriptor.version)
        if key in self._skills:
            raise DuplicateSkill(f"skill already registered: {key}")
        self._skills[key] = descriptor
        if handler is not None:
            self._handlers[key] = handler
        return descriptor

    def find_by_capability(self, tag: str) -> list[SkillDescriptor]:
        found = [d for d in self._skills.values() if d.capability == tag]
        found.sort(key=lambda d: (d.name, d.version))
        return found

    def invoke(self, name: str, version: str, payload):
        key = (name, version)
        if key not in self._skills:
            raise UnknownSkill(f"no skill registered: {key}")
        handler = self._handlers.get(key)
        if self._skills[key].status is SkillStatus.STUB or handler is None:
            raise SkillNotImplemented(f"skill {key} is a stub descriptor")
        return handler(payload)


class FlagCategory(str, Enum):
    TOXICITY = "toxicity"
    PII_EMAIL = "pii-email"
    PII_CARD = "pii-card"
    PII_SSN = "pii-ssn"


@dataclass(frozen=True)
class FlagSpan:
    start: int
    end: int
    category: FlagCategory
    matched: str

    def to_payload(self) -> dict:
        return {
            "start": self.start,
            "end": self.end,
            "category": self.category.value,
            "matched": self.matched,
        }


class Verdict(str, Enum):
    ALLOW = "allow"
    BLOCK = "block"


@dataclass(frozen=True)
class RiskAssessment:
    toxicity_count: int
    pii_count: int
    score: float
    spans: tuple[FlagSpan, ...]
    verdict: Verdict

    def to_payload(self) -> dict:
        return {
            "toxicity_count": self.toxicity_count,
            "pii_count": self.pii_count,
            "score": self.score,
            "spans": [s.to_payload() for s in self.spans],
            "verdict": self.verdict.value,
        }


def assessment_from_payload(payload: dict) -> RiskAssessment:
    return RiskAssessment(
        toxicity_count=payload["toxicity_count"],
        pii_count=payload["pii_count"],
        score=payload["score"],
        spans=tuple(
            FlagSpan(
                start=s["start"],
                end=s["end"],
                category=FlagCategory(s["category"]),
                matched=s["matched"],
            )
            for s in payload["spans"]
        ),
        verdict=Verdict(payload["verdict"]),
    )


def detect_toxicity(text: str, lexicon: tuple[str, ...]) -> list[FlagSpan]:
    """Whole-word, case-insensitive lexicon matches.

    A word boundary is a non-alphanumeric character or the end of text.
    Matches are taken non-overlapping, left to right; at equal starts the
    longer word wins.
    """
    lowered = text.lower()
    candidates: list[tuple[int, int, str]] = []
    for word in lexicon:
        needle = word.lower()
        if not needle:
            continue
        start = 0
        while True:
            idx = lowered.find(needle, start)
            if idx < 0:
                break
            end = idx + len(needle)
            left_ok = idx == 0 or not lowered[idx - 1].isalnum()
            right_ok = end == len(lowered) or not lowered[end].isalnum()
            if left_ok and right_ok:
                candidates.append((idx, end, needle))
            start = idx + 1
    candidates.sort(key=lambda c: (c[0], -(c[1] - c[0]), c[2]))
    spans: list[FlagSpan] = []
    cursor = 0
    for start, end, _ in candidates:
        if start >= cursor:
            spans.append(
                FlagSpan(
                    start=start,
                    end=end,
                    category=FlagCategory.TOXICITY,
                    matched=text[start:end],
                )
            )
            cursor = end
    return spans


_TOKEN = re.compile(r"\S+")
# Card: exactly 16 digits, contiguous or in groups of 4 split by '-' or ' '.
_CARD = re.compile(r"(?<!\d)(?:\d{16}|\d{4}[- ]\d{4}[- ]\d{4}[- ]\d{4})(?!\d)")
# SSN: ddd-dd-dddd, not embedded in a longer digit run.
_SSN = re.compile(r"(?<!\d)\d{3}-\d{2}-\d{4}(?!\d)")

_DOTTED = re.compile(r"[^.\s@]\.[^.\s@]")


def _is_email_token(token: str) -> bool:
    # Exactly one '@', a non-empty local part, and a dot inside the domain.
    if token.count("@") != 1:
        return False
    local, domain = token.split("@")
    return bool(local) and _DOTTED.search(domain) is not None


def detect_pii(text: str) -> list[FlagSpan]:
    """Email, 16-digit card, and SSN patterns.

    An email span is a whole non-space token holding '@' plus a dotted
    domain. Spans come back non-overlapping in text order; where
    candidates overlap, email beats card beats ssn.
    """
    candidates: list[tuple[int, int, int, FlagCategory]] = []
    for m in _TOKEN.finditer(text):
        if _is_email_token(m.group(0)):
            candidates.append((0, m.start(), m.end(), FlagCategory.PII_EMAIL))
    for priority, category, pattern in ((1, FlagCategory.PII_CARD, _CARD), (2, FlagCategory.PII_SSN, _SSN)):
        for m in pattern.finditer(text):
            candidates.append((priority, m.start(), m.end(), category))
    candidates.sort(key=lambda c: (c[0], c[1], -(c[2] - c[1])))
    chosen: list[tuple[int, int, FlagCategory]] = []
    for _, start, end, category in candidates:
        if all(end <= s or start >= e for s, e, _ in chosen):
            chosen.append((start, end, category))
    chosen.sort(key=lambda c: c[0])
    return [
        FlagSpan(start=s, end=e, category=cat, matched=text[s:e]) for s, e, cat in chosen
    ]


TOXICITY_WEIGHT = 0.25
PII_WEIGHT = 0.5
DEFAULT_THRESHOLD = 0.5


def risk_score(toxicity_count: int, pii_count: int) -> float:
    return min(1.0, TOXICITY_WEIGHT * toxicity_count + PII_WEIGHT * pii_count)


@dataclass(frozen=True)
class Guardrail:
    """Toxicity + PII screening with a linear capped risk score."""

    lexicon: tuple[str, ...] = ()
    threshold: float = DEFAULT_THRESHOLD

    def detect_toxicity(self, text: str) -> list[FlagSpan]:
        return detect_toxicity(text, self.lexicon)

    def detect_pii(self, text: str) -> list[FlagSpan]:
        return detect_pii(text)

    def assess_risk(self, text: str) -> RiskAssessment:
        toxic = self.detect_toxicity(text)
        pii = self.detect_pii(text)
        spans = tuple(sorted(toxic + pii, key=lambda s: (s.start, s.end, s.category.value)))
        score = risk_score(len(toxic), len(pii))
        verdict = Verdict.BLOCK if score >= self.threshold else Verdict.ALLOW
        return RiskAssessment(
            toxicity_count=len(toxic),
            pii_count=len(pii),
            score=score,
            spans=spans,
            verdict=verdict,
        )


STUB_SKILLS = (
    SkillDescriptor("ocr-reader", "0.1", "ocr", SkillStatus.STUB),
    SkillDescriptor("image-classifier", "0.1", "image-classification", SkillStatus.STUB),
    SkillDescriptor("speech-transcriber", "0.1", "audio", SkillStatus.STUB),
)


def build_registry(guardrail: Guardrail) -> SkillRegistry:
    """Registry with the guardrail implemented and media skills stubbed."""
    registry = SkillRegistry()
    registry.register(
        SkillDescriptor("guardrail-classifier", "1.0", "guardrail", SkillStatus.IMPLEMENTED),
        handler=guardrail.assess_risk,
    )
    for descriptor in STUB_SKILLS:
        registry.register(descriptor)
    return registry
