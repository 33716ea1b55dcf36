"""
errors.py - exception hierarchy shared by every package.

Input problems subclass ValueError, numerical problems subclass
ArithmeticError or RuntimeError, so callers can keep catching the
built-in families.
"""

#####################################
# Import Modules
#####################################

from typing import Optional


#####################################
# Base Classes
#####################################


class GridModelError(Exception):
    """Root of every error raised by the model solver."""


class SourceError(GridModelError, ValueError):
    """An error tied to a position in a model file."""

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
        source: str = "<model>",
    ):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        super().__init__(self.location_text())

    def location_text(self) -> str:
        if self.line is None:
            return f"{self.source}: {self.message}"
        return f"{self.source}:{self.line}:{self.column}: {self.message}"


#####################################
# Language Errors
#####################################


class LexicalError(SourceError):
    pass


class ParseError(SourceError):
    pass


class ValidationError(GridModelError, ValueError):
    """Raised when a document carries error-level diagnostics."""

    def __init__(self, diagnostics: list):
        self.diagnostics = diagnostics
        lines = "\n".join(str(d) for d in diagnostics)
        super().__init__(f"{len(diagnostics)} validation error(s)\n{lines}")


#####################################
# Evaluation and Solver Errors
#####################################


class EvaluationError(GridModelError, ArithmeticError):
    pass


class DifferentiationError(GridModelError, ValueError):
    pass


class AssignmentError(GridModelError, ValueError):
    pass


class SingularMatrixError(GridModelError, ArithmeticError):
    def __init__(self, message: str, pivot_row: int):
        self.pivot_row = pivot_row
        super().__init__(message)


class UnobservableError(GridModelError, ArithmeticError):
    def __init__(self, message: str, block: str):
        self.block = block
        super().__init__(message)


class LimitCyclingError(GridModelError, RuntimeError):
    pass


#####################################
# Converter Errors
#####################################


class CaseFormatError(GridModelError, ValueError):
    pass


class ConfigError(GridModelError, ValueError):
    pass
