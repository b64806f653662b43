class XXZError(Exception):
    """Base class for all library errors."""


class ConfigError(XXZError, ValueError):
    pass


class PoleError(XXZError, ZeroDivisionError):
    """A spectral parameter sits on a pole of b, c, d or of a determinant entry."""


class SizeError(XXZError, ValueError):
    """The chain is too long for dense finite-lattice algebra."""


class DimensionCap(XXZError, ValueError):
    """A multiple integral was requested beyond the configured number of variables."""


class BadDescriptor(XXZError, ValueError):
    pass


class NonConvergence(XXZError, RuntimeError):
    """An iterative solver stopped before reaching its tolerance."""


class ConvergenceError(XXZError, ArithmeticError):
    """A series was evaluated outside the band where its tail bound holds."""


class NoFermiBoundary(XXZError, RuntimeError):
    """The dressed energy has no zero on the allowed rapidity interval."""


class DegeneracyWarning(RuntimeWarning):
    pass


class ConvergenceWarning(RuntimeWarning):
    pass
