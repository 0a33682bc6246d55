class InvalidParameter(ValueError):
    """A parameter is outside the domain of the operation."""


class InvalidState(RuntimeError):
    """The object is in a state that forbids the requested operation."""


class BudgetExceeded(RuntimeError):
    """An exhaustive enumeration would exceed its configured budget."""


class HypothesisViolation(ValueError):
    """Inputs violate the hypotheses of a bound; ``violations`` lists each one."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
