"""Exception taxonomy shared across the package.

Every error raised on a user-facing path derives from SentalphaError so the
CLI can map it to exit code 2 with a one-line diagnostic. Numeric-internal
failures (shape mismatches inside the learning kernels) also live here so
library callers can catch one base class.
"""


class SentalphaError(Exception):
    """Base class for all package-raised errors."""


class MalformedRecord(SentalphaError):
    """An input row failed to parse; carries the 1-based line number."""

    def __init__(self, line_no, message):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class NonMonotonicDates(SentalphaError):
    """Bar dates are not strictly increasing."""


class GapTooWide(SentalphaError):
    """More than the allowed number of consecutive calendar days lack bars."""


class ZeroPrice(SentalphaError):
    """A close price of zero makes the simple return undefined."""


class UnlabeledText(SentalphaError):
    """A tweet reached the labeling stage without a sentiment label."""


class SpanTooShort(SentalphaError):
    """The requested date span yields no usable rows."""


class DegenerateSplit(SentalphaError):
    """A train/test split leaves one side empty."""


class ConstantSeries(SentalphaError):
    """Correlation is undefined for a zero-variance series."""


class LengthMismatch(SentalphaError):
    """Paired series differ in length."""


class SingleClass(SentalphaError):
    """Training data contains only one class label."""


class DimensionMismatch(SentalphaError):
    """Feature count at predict time differs from training."""


class TooFewMinority(SentalphaError):
    """Minority class too small for the requested neighborhood."""


class InsufficientHistory(SentalphaError):
    """Not enough rows before the first test day to fill the training window."""


class MissingReturn(SentalphaError):
    """A matrix row has no target return to label."""


class SpanMismatch(SentalphaError):
    """Strategy matrices do not all cover the requested test span."""
