"""Exception types shared across the package.

Every error raised by the library derives from HsbError, so callers (and the
CLI, which maps usage errors to exit code 2) can catch one base class.
"""


class HsbError(Exception):
    """Base class for all errors raised by this package."""


class OffsetOutOfRange(HsbError, ValueError):
    """Interval offset outside [0, 2^level)."""


class IdOutOfRange(HsbError, ValueError):
    """Rectangle id outside the canonical id range for (n, d)."""


class WrongVolume(HsbError, ValueError):
    """Rectangle does not have volume 2^(-n)."""


class IndexOutOfRange(HsbError, ValueError):
    """Cell index outside the grid."""


class DimensionMismatch(HsbError, ValueError):
    """Operands disagree on dimension d or volume exponent n."""


class GridTooLarge(HsbError, ValueError):
    """The (2^(n+1))^d cell grid exceeds the grid-bit budget."""


class RegionTooFine(HsbError, ValueError):
    """A region coordinate is finer than the finest-cell grid."""


class RegionTooSmall(HsbError, ValueError):
    """Region volume below 2^(-n-1), where the binomial law may fail."""


class PreconditionViolated(HsbError, RuntimeError):
    """A sign-flip step was attempted before its layer preconditions held."""


class LayerOutOfRange(HsbError, ValueError):
    """A flip targeted a layer outside the valid range for its side."""


class SearchSpaceTooLarge(HsbError, ValueError):
    """Exhaustive enumeration was requested above the hard cap."""


class SignFileError(HsbError, ValueError):
    """A sign-assignment file or string failed to parse."""
