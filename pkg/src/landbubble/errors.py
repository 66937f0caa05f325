"""Exception hierarchy.

Every error carries a ``category`` used by the command-line front end to pick
an exit code: ``config`` (2), ``convergence`` (3) or ``domain`` (4).
"""

from __future__ import annotations


class ModelError(Exception):
    category = "domain"


class ParameterError(ModelError, ValueError):
    """Parameter outside its admissible range."""


class DomainError(ModelError, ValueError):
    """Input outside the domain on which a map is defined."""


class InvalidBracket(ModelError, ValueError):
    """Bracket endpoints do not straddle a sign change."""


class NoConvergence(ModelError, RuntimeError):
    category = "convergence"

    def __init__(self, message: str, best=None, error: float | None = None):
        super().__init__(message)
        self.best = best
        self.error = error


class UnsupportedOrder(ModelError, ValueError):
    pass


class TooFewSamples(ModelError, ValueError):
    pass


class DegenerateDistribution(ModelError, ValueError):
    pass


class AssumptionViolation(ModelError, ValueError):
    pass


class NoSteadyState(ModelError, ValueError):
    pass


class AtThreshold(ModelError, ValueError):
    """Leverage sits on the knife edge between the two regimes."""


class TailNotSummable(ModelError, ValueError):
    pass


class SeriesTooShort(ModelError, ValueError):
    pass


class NoRoot(ModelError, ValueError):
    pass


class ConfigError(ModelError, ValueError):
    category = "config"


EXIT_CODES = {"config": 2, "convergence": 3, "domain": 4}
