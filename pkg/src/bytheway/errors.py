"""Exception types raised by the library.

The CLI maps each family onto an exit code, so keep the hierarchy flat.
"""


class BtwError(Exception):
    """Base class for all library errors."""


class InvalidShapeError(BtwError, ValueError):
    """Tensor shapes are wrong or incompatible."""


class InvalidParameterError(BtwError, ValueError):
    """A scalar parameter is outside its allowed range."""


class SymmetryError(BtwError, ValueError):
    """A spectrum is not conjugate symmetric, so its inverse is not real."""


class NumericContractError(BtwError, ArithmeticError):
    """A numeric postcondition did not hold."""


class FormatError(BtwError, ValueError):
    """A tensor file could not be decoded.

    ``field`` names the part of the file that was rejected.
    """

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class BtwWarning(UserWarning):
    """Degenerate input was handled with a fallback."""
