"""Exception hierarchy shared by the library and the CLI.

Every error carries the process exit code the CLI reports for it.
"""

from __future__ import annotations


class KernelLexiconError(Exception):
    """Base class for all kernel-lexicon errors."""

    exit_code = 5


class ParameterError(KernelLexiconError, ValueError):
    """Raised when an operation receives an out-of-range parameter."""

    exit_code = 2


class IngestError(KernelLexiconError):
    """Raised when a corpus source cannot be read or decoded."""

    exit_code = 3

    def __init__(
        self,
        message: str,
        source: str | None = None,
        byte_offset: int | None = None,
    ) -> None:
        self.source = source
        self.byte_offset = byte_offset
        details = []
        if source is not None:
            details.append(f"source={source}")
        if byte_offset is not None:
            details.append(f"byte_offset={byte_offset}")
        suffix = f" ({', '.join(details)})" if details else ""
        super().__init__(f"{message}{suffix}")


class FormatError(IngestError):
    """Raised when a corpus file does not follow its declared record format."""

    def __init__(
        self,
        message: str,
        source: str | None = None,
        line_number: int | None = None,
    ) -> None:
        self.line_number = line_number
        if line_number is not None:
            message = f"{message} at line {line_number}"
        super().__init__(message, source=source)


class AnalysisError(KernelLexiconError):
    """Raised when an analysis cannot produce a result for the given data."""

    exit_code = 4


class EmptyInputError(AnalysisError):
    """Raised when an operation needs a non-empty table or series."""


class FitError(AnalysisError):
    """Raised when a log-log fit is degenerate."""


class InsufficientOverlapError(AnalysisError):
    """Raised when two lexicons share too few words to compare rankings."""


class EmptyResultError(AnalysisError):
    """Raised when no comparable pairs exist at all."""


class UndefinedCorrelationError(AnalysisError):
    """Raised when a correlation has zero variance on one side."""


class GroupingError(AnalysisError):
    """Raised when group labels cannot support a between/within comparison."""


class DegenerateVectorError(AnalysisError):
    """Raised when a deviation vector has zero variance."""

    def __init__(self, work_id: str) -> None:
        self.work_id = work_id
        super().__init__(f"Deviation vector of work '{work_id}' has zero variance")


class CountOverflowError(AnalysisError, ArithmeticError):
    """Raised when merged counts exceed the 64-bit counter range."""
