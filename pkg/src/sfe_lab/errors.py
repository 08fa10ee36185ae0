"""Exception hierarchy shared by every module."""

from __future__ import annotations


class SfeLabError(Exception):
    """Base class for all library errors."""


class ZeroConditioning(SfeLabError):
    """Conditioning on an event of probability zero."""


class ZeroEvent(SfeLabError):
    """A lemma checker was handed an event of probability zero."""


class PreconditionViolated(SfeLabError):
    """Inputs do not meet the stated precondition of a checker."""


class AsymmetricInput(SfeLabError):
    """An operation that needs a symmetric function got an asymmetric one."""


class ParseError(SfeLabError):
    """Malformed function or protocol file."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        where = f" at line {line}, col {col}" if line is not None else ""
        super().__init__(f"{message}{where}")


class DslSyntaxError(ParseError):
    """Lexical or structural error in a protocol file."""


class ArityError(ParseError):
    """Wrong number of arguments to a DSL form."""


class WidthMismatch(ParseError):
    """Bit widths disagree where they must match."""


class ForwardReference(ParseError):
    """A round refers to a message that is not yet sent."""


class OracleUnavailable(SfeLabError):
    """Replay needs an oracle answer that was not supplied."""

    def __init__(self, query: str):
        self.query = query
        super().__init__(f"no answer available for query {query}")


class BudgetExceeded(SfeLabError):
    """An exact enumeration or Eve's query cap would be exceeded."""

    def __init__(self, message: str, dimension: str = ""):
        self.dimension = dimension
        super().__init__(message)


class HypothesisViolated(SfeLabError):
    """The analysed function does not satisfy the hypothesis of a claim."""


class EmptySegment(SfeLabError):
    """Both frontier segments used by the attack are empty."""
