"""Exception types shared across the package."""


class DagavgError(Exception):
    """Base class for all package errors."""


# --- graph ---------------------------------------------------------------

class SelfLoopError(DagavgError):
    pass


class CycleError(DagavgError):
    """Raised when an operation would introduce a directed cycle."""


class DuplicateEdgeError(DagavgError):
    pass


class UnknownVertexError(DagavgError):
    pass


class VertexMismatchError(DagavgError):
    """Two graphs being compared do not share the same vertex list."""


# --- dataset -------------------------------------------------------------

class UnknownStateError(DagavgError):
    pass


class RaggedRowError(DagavgError):
    pass


class EmptyHeaderError(DagavgError):
    pass


class EmptyDatasetError(DagavgError):
    pass


class SchemaMismatchError(DagavgError):
    pass


# --- bif -----------------------------------------------------------------

class BifError(DagavgError):
    """Base class for BIF ingestion failures."""


class BifSyntaxError(BifError):
    def __init__(self, message, line, column):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UndeclaredVariableError(BifError):
    pass


class ArityMismatchError(BifError):
    pass


class MissingRowError(BifError):
    pass


class RowNotNormalizedError(BifError):
    pass


# --- learn ---------------------------------------------------------------

class InfeasibleConstraintsError(DagavgError):
    pass
