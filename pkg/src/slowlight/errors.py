"""Exception taxonomy shared by the library and the CLI exit codes."""


class SlowlightError(Exception):
    """Base class for all package errors."""


class ConfigError(SlowlightError, ValueError):
    """Malformed or inconsistent configuration (CLI exit code 2)."""


class DegenerateInputError(SlowlightError, ValueError):
    """Both fields vanish, so the dark state is undefined."""


class DomainError(SlowlightError, ValueError):
    """Argument outside the mathematical domain of a function."""


class EscapeError(SlowlightError):
    """The recurring coupling pulse is too weak to release the regenerated probe.

    ``r_min`` is the smallest recurrence ratio that satisfies the escape
    condition, or ``None`` when no ratio can (the first pulse already crosses
    the medium).
    """

    def __init__(self, message, r_min=None):
        super().__init__(message)
        self.r_min = r_min


class NoMatchedR(SlowlightError):
    """The medium is too thin for a matched recurrence ratio to exist."""


class RefinementRequired(SlowlightError):
    """Time step too coarse for the fastest bright-state eigenvalue."""

    def __init__(self, message, lambda_max, suggested_refine):
        super().__init__(message)
        self.lambda_max = lambda_max
        self.suggested_refine = suggested_refine
