"""Exception classes raised by pi_discovery."""

__all__ = [
    "BudgetExceededError",
    "Error",
    "InfeasibleError",
    "NoConvergenceError",
    "ParameterError",
    "ProfileError",
    "UnboundedLatencyError",
]


class Error(Exception):
    """Base class for every pi_discovery error."""


class ParameterError(Error, ValueError):
    """An argument violates a precondition (range, structure, units)."""


class ProfileError(ParameterError):
    """A hardware profile could not be read or is invalid."""


class InfeasibleError(Error):
    """No parametrization satisfies the constraints.

    `constraint` is a short machine-readable key naming the violated
    constraint, e.g. ``"eta_max"`` or ``"k_range"``.
    """

    def __init__(self, message: str, constraint: str) -> None:
        super().__init__(message)
        self.constraint: str = constraint


class NoConvergenceError(Error):
    """An iterative solver did not reach its tolerance."""

    def __init__(self, message: str, iterations: int) -> None:
        super().__init__(message)
        self.iterations: int = iterations


class UnboundedLatencyError(Error):
    """Some initial offset never leads to a discovery within the horizon."""

    def __init__(self, message: str, offset_ns: int) -> None:
        super().__init__(message)
        self.offset_ns: int = offset_ns


class BudgetExceededError(Error):
    """A search grid holds more candidates than the configured budget."""

    def __init__(self, message: str, candidates: int, budget: int) -> None:
        super().__init__(message)
        self.candidates: int = candidates
        self.budget: int = budget
