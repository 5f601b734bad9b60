"""Exception hierarchy shared across the package."""


class FtmError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(FtmError):
    """Syntax error in an RDF input stream.

    Carries the source name and 1-based line number where parsing failed.
    """

    def __init__(self, message: str, source: str = "<input>", line: int = 0):
        self.source = source
        self.line = line
        super().__init__(f"{source}:{line}: {message}" if line else f"{source}: {message}")


class PredicateAbsentError(FtmError, KeyError):
    """A statistic was requested for a predicate the graph does not contain."""

    def __init__(self, predicate: str):
        self.predicate = predicate
        FtmError.__init__(self, f"predicate absent from graph: {predicate}")


class ContractViolationError(FtmError, ValueError):
    """A similarity input fell outside its documented domain."""


class EndpointError(FtmError):
    """A SPARQL endpoint request failed after all retries."""

    def __init__(self, message: str, status: int | None = None, attempts: int = 0):
        self.status = status
        self.attempts = attempts
        super().__init__(f"{message} (status={status}, attempts={attempts})")


class ProviderError(FtmError):
    """An embedding provider request failed."""

    def __init__(self, message: str, status: int | None = None, attempts: int = 0):
        self.status = status
        self.attempts = attempts
        super().__init__(f"{message} (status={status}, attempts={attempts})")


class ProtocolError(FtmError):
    """A remote peer answered with a payload that violates the wire contract."""


class SnapshotError(FtmError):
    """Base class for snapshot persistence failures."""


class SnapshotVersionError(SnapshotError):
    """Snapshot header does not match a supported format version."""


class SnapshotChecksumError(SnapshotError):
    """Snapshot payload is corrupt: a section checksum did not match."""


class ConfigError(FtmError):
    """Invalid run configuration (unknown key, bad type, bad value)."""
