"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line can map failures
to process exit codes without inspecting messages.
"""


class SmvmdeError(Exception):
    exit_code = 1


class ValidationError(SmvmdeError, ValueError):
    """Invalid parameters or malformed input."""

    exit_code = 1


class NumericalError(SmvmdeError, ValueError):
    """Input is well-formed but numerically degenerate."""

    exit_code = 3


class InvalidScaleError(ValidationError):
    pass


class ThresholdError(ValidationError):
    pass


class ContractViolationError(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column

    def __reduce__(self):
        return type(self), (self.args[0], self.row, self.column)


class DegenerateChannelError(NumericalError):
    pass


class WindowTooShortError(NumericalError):
    pass


class EmptyHistogramError(NumericalError):
    pass


class DegenerateDistributionsError(NumericalError):
    pass


class ScaleError(NumericalError):
    """Failure at a specific scale of a multiscale computation."""

    def __init__(self, tau, cause):
        super().__init__(f"scale tau={tau}: {cause}")
        self.tau = tau
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", NumericalError.exit_code)

    def __reduce__(self):
        return type(self), (self.tau, self.cause)


class ExperimentError(SmvmdeError):
    """A failure inside an experiment, annotated with where it happened."""

    def __init__(self, where, cause):
        super().__init__(f"{where}: {cause}")
        self.where = where
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", SmvmdeError.exit_code)

    def __reduce__(self):
        return type(self), (self.where, self.cause)


class InputOutputError(SmvmdeError, OSError):
    """File could not be opened, read or written."""

    exit_code = 2
