"""Exception hierarchy for the trade analytics engine.

Structural data problems (malformed files, unsorted streams, bad ticks) and
numeric degeneracies (zero mean, empty windows) live on separate branches so
callers can map them to different exit paths.
"""


class EngineError(Exception):
    """Base class for every error raised by this package."""


class DataError(EngineError):
    """Input violates a structural contract."""


class InvalidTickError(DataError):
    """A tick with nonpositive volume or a non-finite field."""


class UnsortedInputError(DataError):
    """Tick stream not sorted by time; carries the first offending index."""

    def __init__(self, index: int, message: str | None = None):
        self.index = index
        super().__init__(
            message
            or f"input not sorted by time: first out-of-order tick at index {index}"
        )


class PairingError(DataError):
    """Two series that must pair element-by-element have different lengths."""


class IngestError(DataError):
    """Malformed file content; carries a 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class SchemaError(IngestError):
    """File columns/keys do not match a supported or requested schema."""


class IncompleteSpecError(DataError):
    """A composite specification is missing a required piece (e.g. a correlation)."""


class InfeasibleSpecError(DataError):
    """A specification is internally inconsistent (e.g. unattainable correlation)."""


class InvalidStatsError(DataError):
    """Summary statistics that cannot describe a distribution (negative variance)."""


class DegeneracyError(EngineError):
    """Well-formed input on which the requested statistic is undefined."""


class EmptyWindowError(DegeneracyError):
    """No ticks to estimate from."""


class DegenerateWindowError(DegeneracyError):
    """A window whose weight mass vanishes (zero total volume or second moment)."""


class UndefinedCVError(DegeneracyError):
    """Coefficient of variation requested for a zero-mean quantity."""


class EmptyLaggedWindowError(DegeneracyError):
    """No tick in the window has a resolvable past price."""
