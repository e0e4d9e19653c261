"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Invalid input: bad shapes, out-of-range parameters, malformed scenarios."""


class StallError(RuntimeError):
    """Greedy selection found no column correlated with the residual."""


class DivergenceError(RuntimeError):
    """Proximal gradient objective blew up; usually a step size that is too large."""

    def __init__(self, message, iteration=None, objective=None, initial_objective=None):
        super().__init__(message)
        self.iteration = iteration
        self.objective = objective
        self.initial_objective = initial_objective


class DegenerateSelectionWarning(RuntimeWarning):
    """Least-squares columns were (numerically) rank deficient."""
