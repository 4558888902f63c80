"""Exception types shared across the package."""


class FidsurvError(Exception):
    """Base class for all package-specific errors."""


class EmptyInput(FidsurvError):
    """A data source contained no observations."""


class MalformedRow(FidsurvError):
    """A CSV row could not be parsed as a survival record."""

    def __init__(self, line_number, reason):
        self.line_number = line_number
        self.reason = reason
        super().__init__(f"line {line_number}: {reason}")


class UnknownColumn(FidsurvError):
    """A CSV header named a column the reader does not recognize."""


class NoFailures(FidsurvError):
    """The operation needs at least one uncensored observation."""


class NoEvents(FidsurvError):
    """The pooled two-sample data carry no usable failure events."""


class NonIdentifiable(FidsurvError):
    """The requested survival quantile is never reached by the curve."""


class AllNonIdentifiable(FidsurvError):
    """No fiducial draw reaches the requested survival quantile."""


class DegenerateAtZero(FidsurvError):
    """A log-scale variance transform is undefined because the estimate is 0."""


class MismatchedM(FidsurvError):
    """Two ensembles that must be paired draw-by-draw have different sizes."""
