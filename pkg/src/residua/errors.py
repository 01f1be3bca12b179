"""Exception hierarchy shared by every stage of the pipeline."""

from __future__ import annotations


class ResiduaError(Exception):
    """Base class for all input errors reported by the tool."""

    def __init__(self, message: str, path: str | None = None,
                 line: int | None = None, col: int | None = None):
        super().__init__(message)
        self.message = message
        self.path = path
        self.line = line
        self.col = col

    def location(self) -> str:
        parts = [self.path or "<input>"]
        if self.line is not None:
            parts.append(str(self.line))
            if self.col is not None:
                parts.append(str(self.col))
        return ":".join(parts)

    def __str__(self) -> str:
        return f"{self.location()}: {self.message}"


# frontend
class LexError(ResiduaError):
    pass


class ParseError(ResiduaError):
    pass


class DuplicateUnit(ResiduaError):
    pass


class MissingMain(ResiduaError):
    pass


class UndeclaredVariable(ResiduaError):
    pass


class ParameterRedefinition(ResiduaError):
    pass


class CommonLayoutMismatch(ResiduaError):
    pass


class TypeMismatch(ResiduaError):
    pass


# constraints
class ConstraintParseError(ResiduaError):
    pass


class ConflictingConstraint(ResiduaError):
    pass


class UnknownConstrainedName(ResiduaError):
    pass


class ConstraintTypeMismatch(ResiduaError):
    pass


# analysis
class UnresolvedCallee(ResiduaError):
    pass


class ArityMismatch(ResiduaError):
    pass


class ArgumentTypeMismatch(ResiduaError):
    pass


# specializer
class RecursionDepthExceeded(ResiduaError):
    pass
