"""Exception types shared across the toolkit."""


class ProgsimError(Exception):
    """Base class for all toolkit errors."""


class IngestError(ProgsimError):
    """A data file is missing, unreadable, or malformed at the I/O level."""


class ValidationError(ProgsimError):
    """Input data violates a structural invariant (duplicates, bad ordering, ...)."""


class ParseError(ProgsimError):
    """A file parses at the I/O level but its contents are inconsistent."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        loc = ""
        if path is not None:
            loc = f" [{path}" + (f":{line}" if line is not None else "") + "]"
        super().__init__(message + loc)
        self.path = path
        self.line = line


class MeasureError(ProgsimError):
    """A pairwise measure cannot be computed for the given inputs."""


class ConfigError(ProgsimError):
    """Run configuration is invalid; message aggregates all problems found."""

    def __init__(self, problems: list[str]):
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {p}" for p in problems))
        self.problems = problems
