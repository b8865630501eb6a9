"""Exception types raised across the package.

Every error carries a short machine-readable ``code`` and a process exit
status so the batch front-end can report failures uniformly.
"""


class LyapminError(Exception):
    code = "error"
    exit_status = 2

    def __init__(self, message="", **details):
        super().__init__(message)
        self.details = details

    def to_dict(self):
        return {"error": self.code, "message": str(self), "exit_status": self.exit_status,
                "details": self.details}


class NotExpanding(LyapminError):
    code = "NotExpanding"
    exit_status = 3


class ConvergenceFailure(LyapminError):
    code = "ConvergenceFailure"
    exit_status = 4


class BudgetExceeded(LyapminError):
    code = "BudgetExceeded"
    exit_status = 5


class NotFoundWithinBudget(LyapminError):
    code = "NotFoundWithinBudget"
    exit_status = 5


class NonConvergence(LyapminError):
    """Sub-action iteration stopped above tolerance.

    The partially converged result is attached as ``result`` so callers can
    continue with the weaker certificate.
    """

    code = "NonConvergence"
    exit_status = 4

    def __init__(self, message="", result=None, **details):
        super().__init__(message, **details)
        self.result = result


class EmptySet(LyapminError):
    code = "EmptySet"
    exit_status = 6


class ConstantsOverflow(LyapminError, OverflowError):
    code = "Overflow"
    exit_status = 7


class Infeasible(LyapminError):
    code = "Infeasible"
    exit_status = 7


class GammaOutOfRange(LyapminError):
    code = "GammaOutOfRange"
    exit_status = 7


class SupportOverlap(LyapminError):
    code = "SupportOverlap"
    exit_status = 7


class PlanInvalid(LyapminError):
    code = "PlanInvalid"
    exit_status = 7


class BoundaryAmbiguity(LyapminError):
    code = "BoundaryAmbiguity"
    exit_status = 8


class HorizonExceeded(LyapminError):
    code = "HorizonExceeded"
    exit_status = 8


class ConfigError(LyapminError, ValueError):
    code = "ConfigError"
    exit_status = 9
