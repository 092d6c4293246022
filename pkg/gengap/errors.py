"""Exception hierarchy shared by the library and the CLI.

Every class carries the process exit code the CLI reports for it.
"""

from typing import Optional


class GengapError(Exception):
    exit_code = 1


class InvalidModulusError(GengapError, ValueError):
    """Raised when a modulus that must be prime is not."""


class ShapeMismatchError(GengapError, ValueError):
    pass


class GroupConstructionError(GengapError, ValueError):
    """Bad orders, non-associative tables, generators that do not generate..."""


class UndeclaredGeneratorError(GengapError, KeyError):
    pass


class MixedOperandsError(GengapError, TypeError):
    """Ring arithmetic between elements owned by different groups or coefficient domains."""


class HypothesisViolation(GengapError):
    """A theorem was asked for on inputs outside its hypotheses."""


class InvalidTargetError(GengapError):
    pass


class InvalidResolutionError(GengapError):
    pass


class RefusedComputation(GengapError):
    """The requested quantity is deliberately not computed (normal generation counts of R in F)."""


class ProblemSchemaError(GengapError):
    def __init__(self, message: str, field: Optional[str] = None) -> None:
        self.field = field
        super().__init__(f"{message} (at '{field}')" if field else message)


class BudgetExhausted(GengapError):
    exit_code = 2


class InvariantFailure(GengapError):
    """An internal consistency check failed; the result would contradict a proven statement."""

    exit_code = 3
