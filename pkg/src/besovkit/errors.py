"""Exception hierarchy shared by all modules.

The CLI maps :class:`ArgumentError` to exit code 2 and
:class:`PreconditionError` to exit code 3.
"""


class BesovkitError(Exception):
    pass


class ArgumentError(BesovkitError, ValueError):
    """Malformed or out-of-range input."""


class DomainError(ArgumentError):
    """Evaluation outside the domain of a function (e.g. t <= 0)."""


class RangeError(ArgumentError):
    """Evaluation outside a tabulated range with extrapolation disabled."""


class PreconditionError(BesovkitError):
    """A mathematical hypothesis required by an operation is not verified."""


class ConstructionError(BesovkitError):
    pass


class DecompositionError(BesovkitError):
    pass
