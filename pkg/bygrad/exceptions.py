"""
Error types raised by bygrad
"""


class BygradError(Exception):
    """
    Base class for all errors raised by bygrad
    """


class InvalidArgument(BygradError, ValueError):
    """
    An argument is outside the domain of the operation
    (dimension mismatch, index out of range, d outside [1, N], ...)
    """


class BudgetExceeded(BygradError, RuntimeError):
    """
    An exact enumeration would exceed its configured budget
    """


class Unsupported(BygradError, ValueError):
    """
    Unknown component kind or configuration string
    """


class Infeasible(BygradError, ArithmeticError):
    """
    A closed form is unavailable because its feasibility condition fails
    """


class ConfigError(InvalidArgument):
    """
    Invalid configuration document

    :param message: description of the problem
    :type message: str
    :param path: path of the offending document, defaults to None
    :type path: str, optional
    :param line: 1-based line of the offending entry, defaults to None
    :type line: int, optional
    """

    def __init__(self, message: str, path: str = None, line: int = None) -> None:
        self.message = message
        self.path = path
        self.line = line
        super().__init__(str(self))

    def __str__(self) -> str:
        location = self.path if self.path else '<config>'
        if self.line is not None:
            location = '{}:{}'.format(location, self.line)
        return '{}: {}'.format(location, self.message)
