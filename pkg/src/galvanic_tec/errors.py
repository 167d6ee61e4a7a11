"""Exception hierarchy shared by every module in the package."""


class TECError(Exception):
    """Base class for all package errors."""


class DomainError(TECError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ValidationError(TECError, ValueError):
    """A parameter set violates a physical invariant.

    ``field`` names the offending entry (dotted path) when known.
    """

    def __init__(self, message, field=None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class ParseError(TECError):
    """A table or configuration file could not be parsed."""


class ConfigError(TECError, ValueError):
    """A run or sweep configuration is inconsistent."""


class SingularityError(TECError, ArithmeticError):
    """The nodal system is singular or has a zero-impedance branch."""


class IoError(TECError, OSError):
    """An output artifact could not be written."""
