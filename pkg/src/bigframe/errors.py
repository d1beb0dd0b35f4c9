"""Exception hierarchy.

Every error raised by the package derives from :class:`BigFrameError`, so
callers can catch the whole family at once.
"""


class BigFrameError(Exception):
    """Base class for package errors."""


class DimensionMismatch(BigFrameError, ValueError):
    """Operand shapes are incompatible."""


class ShapeMismatch(DimensionMismatch):
    """Candidate families do not match the base system's shapes."""


class NotSquare(DimensionMismatch):
    """A square operator was required."""


class NotHermitian(BigFrameError):
    """Operator is not self-adjoint within the symmetry tolerance."""


class NotPSD(BigFrameError):
    """Operator has an eigenvalue below the negative allowance."""


class NotPositive(NotPSD):
    """A positive operator was required."""


class RangeNotIncluded(BigFrameError):
    """R(T1) is not contained in R(T2) at the requested tolerance."""

    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


class EmptyInput(BigFrameError, ValueError):
    pass


class NonPositiveBound(BigFrameError, ValueError):
    pass


class ZeroTailNorm(BigFrameError):
    """The operator product K2...Kn vanishes."""


class NormBelowOne(BigFrameError):
    """Lifting an ordinary bi-g-frame needs ||K|| >= 1."""


class CommutatorTooLarge(BigFrameError):
    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


class NotTight(BigFrameError):
    pass


class KStarNotSurjective(BigFrameError):
    pass


class NotKBiGFrame(BigFrameError):
    """A K-bi-g-frame was required as input."""


class ParamsInvalid(BigFrameError, ValueError):
    pass


class IndexOutOfRange(BigFrameError, IndexError):
    pass


class SpecInvalid(BigFrameError, ValueError):
    pass


class ParseError(BigFrameError):
    """Malformed ``bigframe v1`` stream.

    ``line`` is 1-based; ``reason`` is the bare message without location.
    """

    def __init__(self, line, reason):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason
