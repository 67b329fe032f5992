"""Exception hierarchy shared by every module."""


class LiftScaleError(Exception):
    """Base class for all errors raised by liftscale."""


class EmptySupport(LiftScaleError):
    """No complete case exists, or a table has zero total count."""


class ZeroConditioningEvent(LiftScaleError):
    """Conditioning on a feature level that carries no observations."""


class ZeroProbabilityWindow(LiftScaleError):
    """A window whose probability under the feature marginal is zero."""


class InvalidDistribution(LiftScaleError):
    """A probability vector with negative entries or mass not summing to one."""


class EmptyInput(LiftScaleError):
    pass


class InsufficientData(LiftScaleError):
    """Fewer rows than needed to estimate a covariance matrix."""


class DimensionMismatch(LiftScaleError):
    pass


class NoFeasibleProfile(LiftScaleError):
    """The support restriction eliminated every candidate profile."""


class OracleTooLarge(LiftScaleError):
    """Instance exceeds the size guard of the brute-force oracle."""


class MalformedData(LiftScaleError):
    """A data file could not be parsed; carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SchemaMismatch(LiftScaleError):
    pass
