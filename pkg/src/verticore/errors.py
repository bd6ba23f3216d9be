"""Exception types shared across the runtime."""


class VerticoreError(Exception):
    """Base class for all runtime errors."""


class EmptyContent(VerticoreError):
    pass


class EmptyQuery(VerticoreError):
    pass


class EmptyPrompt(VerticoreError):
    pass


class EmptyField(VerticoreError):
    pass


class UnknownTemplate(VerticoreError):
    pass


class MissingVariable(VerticoreError):
    def __init__(self, name: str):
        super().__init__(f"missing template variable: {name}")
        self.name = name


class BackendUnavailable(VerticoreError):
    pass


class DuplicateSkill(VerticoreError):
    pass


class SkillNotImplemented(VerticoreError):
    pass


class UnknownSkill(VerticoreError):
    pass


class UnknownDomain(VerticoreError):
    pass


class DuplicateDomain(VerticoreError):
    pass


class NoDomains(VerticoreError):
    pass


class NoConfidentRoute(VerticoreError):
    """Best routing score fell below the configured confidence floor."""

    def __init__(self, alternatives):
        super().__init__("no domain scored above the confidence floor")
        self.alternatives = tuple(alternatives)


class UnknownReview(VerticoreError):
    pass


class AlreadyDecided(VerticoreError):
    pass


class StillPending(VerticoreError):
    pass


class MissingReplacement(VerticoreError):
    pass


class UnexpectedReplacement(VerticoreError):
    pass


class MissingFile(VerticoreError):
    pass


class InvalidValue(VerticoreError):
    def __init__(self, key: str, detail: str = ""):
        msg = f"invalid config value: {key}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
        self.key = key


class CorruptLog(VerticoreError):
    def __init__(self, line_no: int, detail: str):
        super().__init__(f"corrupt event log at line {line_no}: {detail}")
        self.line_no = line_no
