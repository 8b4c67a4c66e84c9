"""Exception hierarchy shared by all coarsedim modules."""


class CoarseDimError(Exception):
    """Base class for every error raised by this package."""


class MetricError(CoarseDimError, ValueError):
    """A distance table violates the metric axioms."""


class BudgetExceeded(CoarseDimError):
    """A size budget (points, exhaustive search, coloring) would be exceeded."""

    def __init__(self, message, budget=None, requested=None):
        super().__init__(message)
        self.budget = budget
        self.requested = requested


class DomainError(CoarseDimError, ValueError):
    """A parameter lies outside the domain an operation is defined on."""


class OutOfRangeError(CoarseDimError, ValueError):
    """Evaluation outside a sampled range, or a numeric overflow."""


class ConstructionError(CoarseDimError):
    """A threshold search could not complete inside its horizon."""

    def __init__(self, message, n=None):
        super().__init__(message)
        self.n = n


class PreconditionError(CoarseDimError, ValueError):
    """Inputs do not satisfy an operation's documented precondition."""


class WindowTooSmall(CoarseDimError):
    """The truncation leaves no usable data for an asymptotic estimate."""


class ParseError(CoarseDimError, ValueError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position
