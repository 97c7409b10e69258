"""Exception types shared across the package."""


class SeplabError(Exception):
    """Base class for all errors raised by seplab."""


class NonHermitian(SeplabError, ValueError):
    pass


class DimensionMismatch(SeplabError, ValueError):
    pass


class InvalidSpec(SeplabError, ValueError):
    pass


class StreamExhausted(SeplabError, RuntimeError):
    """A quasi stream was asked for more coordinates than one point carries."""


class DomainError(SeplabError, ValueError):
    pass


class NonConvergence(SeplabError, ArithmeticError):
    pass


class Unsupported(SeplabError, NotImplementedError):
    pass


class InvalidConfig(SeplabError, ValueError):
    pass
