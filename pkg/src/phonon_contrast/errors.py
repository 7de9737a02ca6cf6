"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Bad configuration document or CLI arguments (exit code 2)."""


class NonConvergenceError(RuntimeError):
    """A numeric refinement loop hit its cap before reaching tolerance (exit code 3).

    Carries the best estimate so callers can report how far the loop got.
    """

    def __init__(self, message, achieved=None, value=None):
        super().__init__(message)
        self.achieved = achieved
        self.value = value
