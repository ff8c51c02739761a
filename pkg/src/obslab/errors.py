class ConfigurationError(ValueError):
    """Invalid model, scheme or experiment parameters.

    ``violations`` lists every failed constraint, not just the first.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class PreconditionError(ValueError):
    """An operation was called outside its domain (grid too coarse, span too short, ...)."""
