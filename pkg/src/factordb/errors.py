"""Exception hierarchy shared by all factordb modules."""


class FactorDBError(Exception):
    """Base class for every error raised by this package."""


class FormatError(FactorDBError):
    """Malformed input file (CSV layout, JSON tree, f-rep text)."""


class IntegrityError(FactorDBError):
    """Duplicate identifiers or otherwise inconsistent relation contents."""


class SchemaError(FactorDBError):
    """A query and a database disagree on relations or attributes."""


class QuerySyntaxError(FactorDBError):
    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class UnsatisfiableQuery(FactorDBError):
    """The selection forces an attribute to two distinct constants."""


class SizeExceeded(FactorDBError):
    """An expansion or brute-force result outgrew the configured limit."""


class InvalidTree(FactorDBError):
    """An f-tree does not satisfy the structural requirements for a query."""
