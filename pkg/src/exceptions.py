"""Custom exceptions for the RFRBoost toolkit.

Provides a structured exception hierarchy for clear error handling:
- RFRBoostError: Base exception for all toolkit errors
- InvalidInput: Bad shapes, non-finite values, out-of-range labels
- ConfigurationError: Invalid run/training configuration
- NumericalError: Solver failures (singular systems, degenerate problems)
- DataError: CSV ingestion and schema failures
"""

from __future__ import annotations


class RFRBoostError(Exception):
    """Base exception for all RFRBoost toolkit errors.

    All custom exceptions inherit from this, allowing:
        try:
            model = train_gradient(data, cfg, kind)
        except RFRBoostError as e:
            handle_any_rfrboost_error(e)
    """

    def __init__(self, message: str, component: str | None = None, details: dict | None = None):
        self.message = message
        self.component = component
        self.details = details or {}
        super().__init__(self._format_message())

    def _format_message(self) -> str:
        if self.component:
            return f"[{self.component}] {self.message}"
        return self.message

    def to_dict(self) -> dict:
        """Convert exception to dictionary for logging and reports."""
        return {
            "error_type": self.__class__.__name__,
            "message": self.message,
            "component": self.component,
            "details": self.details,
        }


class InvalidInput(RFRBoostError):
    """Input validation failure.

    Raised when:
    - Matrix dimensions are inconsistent
    - Entries are NaN or infinite
    - Labels fall outside 0..K-1
    - A parameter is outside its allowed range

    Example:
        raise InvalidInput(
            "Column count does not match layer input dimension",
            component="random_features",
            details={"expected": 12, "found": 10}
        )
    """
    pass


class ConfigurationError(RFRBoostError):
    """Configuration issue.

    Raised when:
    - A run config file is missing or malformed
    - Unknown keys are present
    - Scalar/diagonal structure is requested with feature_dim != hidden_dim
    - Required fields for a task are absent
    """
    pass


class NumericalError(RFRBoostError):
    """Base class for solver-level failures surfaced to the boosting loops."""
    pass


class SingularSystem(NumericalError):
    """Normal equations or diagonal sandwich system are singular (lambda = 0)."""
    pass


class DegenerateProblem(NumericalError):
    """Scalar sandwich with lambda = 0 and ZW = 0.

    Signals a dead random layer to the greedy loop, which resamples once
    and then skips the block.
    """
    pass


class DegeneratePairs(NumericalError):
    """Every SWIM candidate pair has coincident inputs."""
    pass


class ZeroGradient(NumericalError):
    """Functional gradient vanished; the gradient loop treats this as converged."""
    pass


class DataError(RFRBoostError):
    """Dataset ingestion or compatibility failure.

    Example:
        raise DataError(
            "Dataset has no rows",
            source="data/train.csv",
        )
    """

    def __init__(self, message: str, source: str | None = None,
                 component: str | None = None, details: dict | None = None):
        self.source = source
        details = details or {}
        details["source"] = source
        super().__init__(message, component, details)


class IngestError(DataError):
    """CSV parsing failure with a line/column location.

    Raised when:
    - A row has a different number of fields than the header
    - A numeric column holds a non-numeric value
    - A value is missing
    - A declared column is absent from the header

    Example:
        raise IngestError(
            "Non-numeric value 'abc' in numeric column",
            source="train.csv",
            line=14,
            column="x3",
        )
    """

    def __init__(self, message: str, source: str | None = None,
                 line: int | None = None, column: str | None = None,
                 details: dict | None = None):
        self.line = line
        self.column = column
        details = details or {}
        details["line"] = line
        details["column"] = column
        location = []
        if line is not None:
            location.append(f"line {line}")
        if column is not None:
            location.append(f"column '{column}'")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message, source=source, component="ingest", details=details)


class SchemaMismatch(DataError):
    """Model and dataset disagree on feature layout."""

    def __init__(self, message: str, expected: int | str | None = None,
                 found: int | str | None = None, source: str | None = None,
                 details: dict | None = None):
        self.expected = expected
        self.found = found
        details = details or {}
        details["expected"] = expected
        details["found"] = found
        super().__init__(f"{message}: expected {expected}, found {found}",
                         source=source, component="schema", details=details)
