"""Exception hierarchy.

Every error carries a stable machine-readable ``code`` and a distinct process
``exit_status`` used by the command line front end.
"""

from __future__ import annotations


class TSError(Exception):
    """Base class for all errors raised by the package."""

    code = "ERROR"
    exit_status = 1


class InvalidScale(TSError):
    code = "INVALID_SCALE"
    exit_status = 10


class InvalidRatio(InvalidScale):
    code = "INVALID_RATIO"
    exit_status = 11


class NotCommensurate(InvalidScale):
    code = "NOT_COMMENSURATE"
    exit_status = 12


class NotInScale(TSError):
    code = "NOT_IN_SCALE"
    exit_status = 13


class OutOfRange(TSError):
    code = "OUT_OF_RANGE"
    exit_status = 14


class TooManyPoints(TSError):
    """The requested point set is infinite or larger than the cap."""

    code = "TOO_MANY"
    exit_status = 15


class ExprSyntaxError(TSError):
    code = "SYNTAX_ERROR"
    exit_status = 20

    def __init__(self, position: int, message: str):
        super().__init__(f"{message} (at position {position})")
        self.position = position
        self.message = message


class DomainError(TSError):
    code = "DOMAIN_ERROR"
    exit_status = 21


class GNotIncreasing(TSError):
    code = "G_NOT_INCREASING"
    exit_status = 30


class NonTermination(TSError):
    code = "NON_TERMINATION"
    exit_status = 31


class NoConvergence(TSError):
    """Refinement budget exhausted; ``result`` holds the last enclosure."""

    code = "NO_CONVERGENCE"
    exit_status = 32

    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result


class SampleOutOfBox(TSError):
    code = "SAMPLE_OUT_OF_BOX"
    exit_status = 33


class PhiNotIncreasing(TSError):
    code = "PHI_NOT_INCREASING"
    exit_status = 34


class JobError(TSError):
    code = "BAD_JOB"
    exit_status = 2
