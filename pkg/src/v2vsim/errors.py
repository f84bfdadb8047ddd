"""Exception types shared across the package.

The CLI maps these onto exit codes: validation problems exit 2,
infeasible plans (including unreachable bit budgets) exit 3, and
I/O or file-format failures exit 4.
"""


class ValidationError(ValueError):
    """An input violates a documented precondition or invariant."""


class ParseError(ValidationError):
    """Scenario text could not be parsed. Carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class SizeError(ValidationError):
    """Instance too large for exhaustive enumeration."""


class InfeasibleError(RuntimeError):
    """No plan satisfies the constraint set. The message names the constraint."""


class BudgetError(InfeasibleError):
    """Bit budget unreachable even at the coarsest quantization step."""


class ImageFormatError(OSError):
    """Malformed or unsupported PPM/PGM data."""
