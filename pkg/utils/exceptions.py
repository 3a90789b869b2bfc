"""
Exception hierarchy for eigencomplete

ValidationError subclasses map to CLI exit code 2, NumericalError subclasses to 3.
"""
from typing import Optional


class EigencompleteError(Exception):
    """Base class for every error raised by the package"""
    exit_code = 1


class ValidationError(EigencompleteError):
    """Inputs violate a documented precondition"""
    exit_code = 2


class NumericalError(EigencompleteError):
    """A numerical procedure failed to reach its tolerance"""
    exit_code = 3


class BadParams(ValidationError):
    pass


class ConfigError(ValidationError):
    def __init__(self, message: str, key: Optional[str] = None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


class OutOfDomain(ValidationError):
    pass


class WrongClass(ValidationError):
    pass


class UnknownFamily(ValidationError):
    pass


class OutOfSpectrum(ValidationError):
    pass


class InGap(OutOfSpectrum):
    pass


class AtBandEdge(OutOfSpectrum):
    pass


class SupportExceedsBox(ValidationError):
    pass


class ExpansionNotSupported(ValidationError):
    """No spectral function is available for this potential"""


class NoSignChange(NumericalError):
    pass


class MaxIterations(NumericalError):
    pass


class NoLimit(NumericalError):
    pass


class NonConvergence(NumericalError):
    """Carries the best estimate reached and its error bound"""

    def __init__(self, message: str, estimate=None, error: Optional[float] = None):
        self.estimate = estimate
        self.error = error
        super().__init__(message)
