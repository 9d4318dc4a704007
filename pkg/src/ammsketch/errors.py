"""Exception types raised by ammsketch."""


class AmmError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(AmmError, ValueError):
    pass


class OutOfRange(AmmError, ValueError):
    pass


class ZeroMatrix(AmmError, ValueError):
    pass


class NonConvergence(AmmError, RuntimeError):
    """Power iteration hit ``max_iter`` before the residual dropped below ``tol``."""


class DegenerateWeights(AmmError, ValueError):
    pass


class IndexOutOfSupport(AmmError, IndexError):
    pass


class SupportMismatch(AmmError, ValueError):
    pass


class ConfigError(AmmError, ValueError):
    pass


class MatrixFormatError(AmmError, ValueError):
    """A matrix file could not be parsed, or its header disagrees with its body."""
