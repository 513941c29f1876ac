"""Exception types raised by the public API.

Everything derives from LoocError (a ValueError) so callers can catch the
whole family or stay with stdlib idioms. Codec errors get their own branch
because the CLI maps them to a different exit code than config errors.
"""


class LoocError(ValueError):
    """Base class for all contract violations raised by this package."""


class LengthMismatchError(LoocError):
    pass


class NonFiniteInputError(LoocError):
    pass


class IndivisibleDimensionError(LoocError):
    pass


class DimensionMismatchError(LoocError):
    pass


class EmptySampleSetError(LoocError):
    pass


class ZeroVectorCosineError(LoocError):
    pass


class EmptyAnchorSetError(LoocError):
    pass


class IndexOutOfRangeError(LoocError):
    pass


class ShapeMismatchError(LoocError):
    pass


class WindowTooLargeError(LoocError):
    pass


class InconsistentGridsError(LoocError):
    pass


class IndivisibleShapeError(LoocError):
    pass


class NonFiniteLossError(LoocError):
    """Training diverged: the total loss became NaN or infinite."""


class CodecError(LoocError):
    """Base class for malformed on-disk data (codebook, grid, PGM files)."""


class TruncatedStreamError(CodecError):
    pass


class MalformedHeaderError(CodecError):
    pass


class TruncatedPixelsError(CodecError):
    pass


class UnsupportedMaxvalError(CodecError):
    pass
