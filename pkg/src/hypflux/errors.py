"""Exception types raised across the package."""


class HypfluxError(Exception):
    """Base class for all package errors."""

    exit_code = 3


class TrivialWord(HypfluxError):
    pass


class NotHyperbolic(HypfluxError):
    pass


class InvalidGenerators(HypfluxError):
    exit_code = 1


class CutoffTooLarge(HypfluxError):
    exit_code = 1


class FormatVersionMismatch(HypfluxError):
    exit_code = 2


class CorruptRecord(HypfluxError):
    exit_code = 2


class InvariantViolation(HypfluxError):
    exit_code = 2


class IncompleteSpectrum(HypfluxError):
    """The length spectrum does not reach the support of the window transform."""

    exit_code = 2


class QuadratureFailure(HypfluxError):
    exit_code = 3


class InvalidFluxSpec(HypfluxError):
    exit_code = 1


class ConfigError(HypfluxError):
    exit_code = 1
