"""Exception types raised by the library.

All of them derive from ``ValueError`` so callers that only care about bad
input can catch that.
"""


class RiskHorizonError(ValueError):
    """Base class for every error raised by riskhorizon."""


class InvalidStepError(RiskHorizonError):
    """A time step or horizon is zero or negative."""


class SamplingError(RiskHorizonError):
    """Samples are too few or not uniformly spaced."""


class VarianceError(RiskHorizonError):
    """A variance that must be positive is not."""


class EmptyProfileError(RiskHorizonError):
    pass


class ProfileTooShortError(RiskHorizonError):
    """A distance profile does not reach the requested horizon."""


class SpecError(RiskHorizonError):
    """A scenario spec is inconsistent or incomplete."""


class HorizonTooShortError(RiskHorizonError):
    pass


class EmptyGroupError(RiskHorizonError):
    pass


class StepTooCoarseError(RiskHorizonError):
    """Rates times step exceed what a Bernoulli walk can represent."""
