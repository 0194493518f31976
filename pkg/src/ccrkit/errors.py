"""Exception hierarchy shared by every ccrkit module."""


class CcrError(ValueError):
    """Base class for all ccrkit errors."""


class InvalidState(CcrError):
    """A matrix or vector violates the density-matrix / pure-state invariants."""


class NotHermitian(InvalidState):
    pass


class BadIndex(CcrError):
    pass


class BadCut(CcrError):
    pass


class DimMismatch(CcrError):
    pass


class WeightMismatch(CcrError):
    pass


class NotQubit(CcrError):
    pass


class NotTwoQubit(CcrError):
    pass


class NotPure(CcrError):
    pass


class DimTooLarge(CcrError):
    pass


class GridTooCoarse(CcrError):
    pass


class MissingKey(CcrError, KeyError):
    pass


class UnknownRelation(CcrError, KeyError):
    pass


class ParseError(CcrError):
    """State-file parse failure carrying a 1-based line/column position."""

    def __init__(self, message, line=1, column=1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column
