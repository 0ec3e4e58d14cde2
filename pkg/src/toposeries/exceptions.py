"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid parameters or configuration (CLI exit code 2)."""


class ComputationError(RuntimeError):
    """A computation could not be completed (CLI exit code 3)."""


class SimplexBudgetError(ComputationError):
    """The Rips complex would exceed the configured simplex cap."""


class ScaleMismatchError(ValueError):
    """Two diagrams or a diagram and a summary use different filtration conventions."""


class PipelineError(ComputationError):
    """A featurization step failed; ``step`` names the stage."""

    def __init__(self, step: str, cause: BaseException):
        self.step = step
        self.cause = cause
        super().__init__(f"{step}: {cause}")
