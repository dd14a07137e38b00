"""
Exceptions raised by stressnet.

Every precondition violation is a `ValidationError`, every problem with a
file on disk is a `FormatError` (an `OSError`). The command line maps the
former to exit code 1 and the latter to exit code 2.
"""


class StressNetError(Exception):
    """Base class of all stressnet errors."""


class ValidationError(StressNetError, ValueError):
    """An input violates a documented precondition."""


class FormatError(StressNetError, OSError):
    """A file on disk does not follow its declared format."""


# pylint: disable=missing-class-docstring
class EmptySignal(ValidationError):
    pass


class NonFiniteInput(ValidationError):
    pass


class TooFewKnots(ValidationError):
    pass


class NonMonotonicKnots(ValidationError):
    pass


class InvalidBand(ValidationError):
    pass


class SignalTooShort(ValidationError):
    pass


class NonPositiveSigma(ValidationError):
    pass


class NoPeaksDetected(ValidationError):
    pass


class FewerThanTwoKnots(ValidationError):
    pass


class NonPositiveScale(ValidationError):
    pass


class WindowLongerThanRecord(ValidationError):
    pass


class RoiOutOfBounds(ValidationError):
    pass


class RectOutOfBounds(ValidationError):
    pass


class TooFewFrames(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class NotADistribution(ValidationError):
    pass


class TargetOutOfRange(ValidationError):
    pass


class EmptyDataset(ValidationError):
    pass


class AlignmentError(ValidationError):
    pass


class SingleClassDataset(ValidationError):
    pass


class OutOfRangeProbability(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class ZeroVariance(ValidationError):
    pass


class NoPositives(ValidationError):
    pass


class InvalidProfile(ValidationError):
    pass


class CountOverflowRisk(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class DuplicateTensorName(ValidationError):
    pass


class ShapeMismatchWithDescriptor(ValidationError):
    pass


class DimensionOverflow(ValidationError):
    pass


class UnknownSubcommand(ValidationError):
    pass


class BadMagic(FormatError):
    pass


class TruncatedFile(FormatError):
    pass


class MalformedCsv(FormatError):
    pass


# pylint: enable=missing-class-docstring
