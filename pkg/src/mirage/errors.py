"""Exception types raised across the package."""


class MirageError(Exception):
    """Base class for every error raised by this package."""


class DegenerateChannelError(MirageError, ValueError):
    """The link has zero capacity, so nothing can be delivered."""


class ReliabilityConfigError(MirageError, ValueError):
    pass


class ReliabilityExhaustedError(MirageError, RuntimeError):
    """ARQ ran out of attempts before the CRC verified."""

    def __init__(self, message, attempts=0):
        super().__init__(message)
        self.attempts = attempts


class DimensionMismatchError(MirageError, ValueError):
    pass


class UnknownCodebookError(MirageError, ValueError):
    pass


class InsufficientDataError(MirageError, ValueError):
    pass


class DivergenceError(MirageError, RuntimeError):
    pass


class CodebookFormatError(MirageError, ValueError):
    pass


class UnknownScorerError(MirageError, ValueError):
    pass


class ScoreFileError(MirageError, ValueError):
    pass


class BudgetError(MirageError, ValueError):
    pass


class PayloadError(MirageError, ValueError):
    """Base class for wire-format parse failures."""


class BadMagicError(PayloadError):
    pass


class BadVersionError(PayloadError):
    pass


class CRCMismatchError(PayloadError):
    pass


class TruncatedStreamError(PayloadError):
    pass


class CaptionDecodeError(MirageError, ValueError):
    """A caption bitstream is not a valid DEFLATE stream."""


class ShapeMismatchError(MirageError, ValueError):
    pass


class ZeroDenominatorError(MirageError, ZeroDivisionError):
    pass


class GenerationError(MirageError, RuntimeError):
    pass


class EndpointUnreachableError(GenerationError):
    pass


class MalformedResponseError(GenerationError):
    pass


class GenerationTimeoutError(GenerationError):
    pass


class IngestError(MirageError, ValueError):
    pass
