"""Exception types shared across the package.

Plain ``ValueError`` is used for ordinary invalid-input conditions; the
classes here mark failure modes that callers may want to handle separately.
"""


class SingularityError(ArithmeticError):
    """A required matrix inverse does not exist (e.g. response evaluated at a
    unit-circle pole, or an FRF ratio with a zero denominator)."""


class ParseError(ValueError):
    """A data or config file could not be parsed.

    Attributes:
        line: 1-based line number of the offending row, if known.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InfeasibleError(RuntimeError):
    """A receding-horizon run hit an infeasible (or unsolved) optimal control
    problem; carries the step index at which the loop aborted."""

    def __init__(self, step: int, status: str):
        super().__init__(f"solver returned status '{status}' at step {step}")
        self.step = step
        self.status = status
