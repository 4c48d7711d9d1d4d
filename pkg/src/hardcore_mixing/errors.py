"""Exception taxonomy shared by all modules.

CLI exit-code mapping: usage/config problems -> 2, exceeded enumeration or
matrix caps -> 3, failed numeric/structural checks -> 1.
"""


class HardcoreError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(HardcoreError, ValueError):
    """A constructor or operation received an out-of-domain argument."""


class MixedParityError(InvalidParameterError):
    """A vertex set spanned both parity classes where one class was required."""


class CapExceededError(HardcoreError):
    """An exhaustive operation would exceed its configured size cap."""


class PreconditionError(HardcoreError):
    """A documented precondition failed; the message names the witness."""


class IterationBudgetError(HardcoreError):
    """An iterative procedure did not finish within its iteration budget."""


class ConfigError(HardcoreError, ValueError):
    """A config file or config value could not be parsed against the schema."""
