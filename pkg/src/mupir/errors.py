"""Exception types shared across the package."""


class MupirError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameter(MupirError, ValueError):
    pass


class DimensionMismatch(MupirError, ValueError):
    pass


class SingularMatrix(MupirError, ArithmeticError):
    pass


class ParamMismatch(MupirError, ValueError):
    """A library or cache does not match the parameters a scheme was built for."""


class InvalidDemand(MupirError, ValueError):
    pass


class DecodeFailure(MupirError):
    """Decoding hit a singular system or inconsistent side information."""


class NotEnumerable(MupirError):
    """The scheme's randomness cannot be enumerated exhaustively."""


class OutOfRange(MupirError, ValueError):
    pass


class IndivisibleLength(MupirError, ValueError):
    pass
