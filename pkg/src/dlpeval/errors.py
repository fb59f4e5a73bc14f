"""Exception types shared across the package."""


class DlpEvalError(Exception):
    """Base class for all errors raised by this package."""


class IngestError(DlpEvalError):
    """Malformed or inconsistent input data.

    ``line`` is the 1-based line number in the source file when the error
    can be pinned to one, else None.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DegenerateSplitError(DlpEvalError):
    """A requested time-based split leaves one side empty."""


class EmptyCandidateSetError(DlpEvalError):
    """A negative-sampling strategy has no legal candidate for an event."""


class ScoreLogError(DlpEvalError):
    """Invalid score-log content, on read or write.

    ``line`` is the 1-based line number for row-level problems, else None.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
