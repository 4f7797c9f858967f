class CausalAbaError(Exception):
    """Base class for all errors raised by causalaba."""


class QueryError(CausalAbaError, ValueError):
    """A query violates its preconditions (bad variable, overlapping sets, ...)."""


class CapacityError(CausalAbaError):
    """An exhaustive procedure was asked to go beyond its configured bound."""


class NotExtendableError(CausalAbaError):
    """A partially directed graph has no consistent DAG extension."""


class DegenerateDataError(CausalAbaError):
    """Data cannot support the requested test (singular correlation, zero variance)."""


class SampleSizeError(CausalAbaError):
    """Too few rows for the conditioning set size."""


class UnsupportedDimensionError(CausalAbaError, ValueError):
    """The operation is undefined for this number of variables."""


class FormatError(CausalAbaError, ValueError):
    """A text input could not be parsed."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)


class BifError(FormatError):
    """Lexical, syntactic or semantic error in a BIF file."""


class CappedError(CausalAbaError):
    """An enumeration hit its cap; ``partial`` carries whatever was computed."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class SolverTimeout(CausalAbaError):
    """The time budget ran out; ``log`` carries the partial run record."""

    def __init__(self, message, log=None):
        super().__init__(message)
        self.log = log
