"""Exception types shared across the package."""


class SedkitError(Exception):
    """Base class for every error raised by this package."""


class NodeNotFound(SedkitError):
    """A referenced node is not part of the graph or schema."""


class NotADag(SedkitError):
    """An operation that requires a DAG got a graph that is not one."""


class NotExtendable(SedkitError):
    """A partially directed graph admits no consistent extension."""


class ParseError(SedkitError):
    """An input file is malformed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownState(SedkitError):
    """A data cell holds a state label missing from the fixed schema."""

    def __init__(self, column: str, value: str):
        self.column = column
        self.value = value
        super().__init__(f"unknown state {value!r} in column {column!r}")


class SchemaMismatch(SedkitError):
    """Two objects that must share a variable schema do not."""


class EdgeNotFound(SedkitError):
    """A referenced edge is not present in the graph."""


class InvalidCandidate(SedkitError):
    """A reconstruction candidate violates its structural preconditions."""


class InvalidReconstruction(SedkitError):
    """A reconstruction graph is structurally unusable (e.g. childless hidden node)."""
